from django.apps import AppConfig


class TcgameConfig(AppConfig):
    name = 'tcgame'
    verbose_name = 'Transport choice games'
