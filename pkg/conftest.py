import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'transport_choice.settings')
django.setup()
