# urls.py
from django.urls import path
from . import views

urlpatterns = [
    path('runs/', views.run_list, name='run_list'),
    path('runs/<int:pk>/', views.run_detail, name='run_detail'),
    path('runs/<int:pk>/export/', views.run_export, name='run_export'),
]
