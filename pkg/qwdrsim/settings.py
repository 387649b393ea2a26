import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('QWDR_SECRET_KEY', 'qwdr-local-secret-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get('QWDR_DEBUG', '1') == '1'

ALLOWED_HOSTS = ['*']

# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'qwdr',
]


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        '': {  # корневой логгер
            'handlers': ['console'],
            'level': 'INFO',
        },
        'qwdr': {
            'handlers': ['console'],
            'level': os.environ.get('QWDR_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}


MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'qwdrsim.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'qwdrsim.wsgi.application'

# Database
# Прогоны экспериментов хранятся локально
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.environ.get('QWDR_DB_PATH', BASE_DIR / 'db.sqlite3'),
    }
}

# Password validation
AUTH_PASSWORD_VALIDATORS = [
    {
        'NAME': 'django.contrib.auth.password_validation.UserAttributeSimilarityValidator',
    },
    {
        'NAME': 'django.contrib.auth.password_validation.MinimumLengthValidator',
    },
]

# Internationalization
LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

# Static files (CSS, JavaScript, Images)
STATIC_URL = '/static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

CACHES = {
    'default': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'qwdr-cache',
    }
}

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Параметры симуляции QWDR по умолчанию.
# Файл сценария может переопределить любое из значений.
QWDR_DEFAULTS = {
    # часы пересмотра
    'k0': 0.01,
    # распределённая оптимизация
    'alpha': 1e-4,
    'cycles': 15,
    'n_rep': 10,
    'tolerance': 1e-9,
    'weight_argument': 'network',  # 'network' | 'node'
    # логистический вес
    'a1': 0.2,
    'a2': 2.0,
    # канал
    'sigma2': 1.0,
    'gamma_truncation_factor': 10.0,
    'gain_model': 'power',  # 'power' | 'amplitude' | 'fixed'
    'gain_scale': 1.0e6,
    'channel_seed': 1,
    'arrival_seed': 2,
    # прогон
    'horizon_slots': 100000,
    'replications': 5,
    'queue_sample_interval': 100,
    'check_invariants': True,
    'schedule_trace': False,
    'solver_trace': False,
    'mode': 'qwdr',  # 'qwdr' | 'unweighted'
    # оракул пропускной способности
    'capacity_channel_samples': 200,
    'capacity_tolerance': 1e-6,
}

QWDR_OUTPUT_DIR = Path(os.environ.get('QWDR_OUTPUT_DIR', BASE_DIR / 'runs'))
