# qwdr/admin.py

from qwdr.admin_modules.scenario_admin import *
from qwdr.admin_modules.run_admin import *
