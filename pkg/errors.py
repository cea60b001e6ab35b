"""Исключения сэмплера и коды завершения CLI"""


class SamplerError(Exception):
    """Базовая ошибка пакета"""

    exit_code = 1


class ValidationError(SamplerError, ValueError):
    """Некорректные входные данные или конфигурация"""

    exit_code = 2


class NumericalError(SamplerError, ArithmeticError):
    """Численная ошибка: вырожденность, неудачная факторизация, сбой оптимизатора"""

    exit_code = 3

    def __init__(self, message: str, index: int = None):
        super().__init__(message)
        self.index = index


class StorageError(SamplerError, OSError):
    """Ошибка чтения или записи файлов"""

    exit_code = 4
