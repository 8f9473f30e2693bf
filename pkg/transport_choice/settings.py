"""
Django settings for the transport_choice project.

The project has no web surface: Django provides configuration, logging,
the management-command CLI and the test runner for the ``tcgame`` app.
Every tunable can be overridden from the environment or a ``.env`` file.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables
load_dotenv()

SECRET_KEY = os.getenv('SECRET_KEY', 'tcgame-local-only-key')

DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'tcgame',
]

# No models are stored; the test runner only needs the dummy backend.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Solver settings
TC_SOLVER = {
    'TOLERANCE': float(os.getenv('TC_SOLVER_TOLERANCE', '1e-10')),
    'MAX_ITERATIONS': int(os.getenv('TC_SOLVER_MAX_ITERATIONS', '10000')),
    'DAMPING': float(os.getenv('TC_SOLVER_DAMPING', '1.0')),
}

TC_CORE_TOLERANCE = float(os.getenv('TC_CORE_TOLERANCE', '1e-9'))

TC_ORACLE = {
    'RESOLUTION': int(os.getenv('TC_ORACLE_RESOLUTION', '200')),
}

# Monte Carlo replication settings
TC_EXPERIMENT = {
    'SEED': int(os.getenv('TC_EXPERIMENT_SEED', '20210601')),
    'TRIALS': int(os.getenv('TC_EXPERIMENT_TRIALS', '10000')),
    'WORKERS': int(os.getenv('TC_EXPERIMENT_WORKERS', '1')),
    'FAILURE_SAMPLES': int(os.getenv('TC_EXPERIMENT_FAILURE_SAMPLES', '5')),
    'MAX_CONSECUTIVE_FAILURES': int(os.getenv('TC_EXPERIMENT_MAX_FAILURES', '100')),
}

# Run the 10,000-draw property and replication suites instead of reduced ones
TC_FULL_SUITES = os.getenv('TC_FULL_SUITES', 'False').lower() == 'true'

TC_LOG_LEVEL = os.getenv('TC_LOG_LEVEL', 'INFO').upper()

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': BASE_DIR / 'logs' / 'tcgame.log',
            'formatter': 'verbose',
        },
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'error_file': {
            'level': 'ERROR',
            'class': 'logging.FileHandler',
            'filename': BASE_DIR / 'logs' / 'errors.log',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
        'tcgame': {
            'handlers': ['file', 'console', 'error_file'],
            'level': TC_LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Create logs directory if it doesn't exist
logs_dir = BASE_DIR / 'logs'
logs_dir.mkdir(exist_ok=True)
