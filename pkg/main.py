"""Командная строка сэмплера: simulate, fit, predict, score, correction-dist и список предустановок"""
import argparse
import logging
import sys
from typing import Optional, Sequence

from config import COMMAND_FIELDS, COMMANDS, COMMON_FIELDS, Field, load_run_config
from errors import SamplerError, StorageError
from presets import list_presets
from reports import format_preset_list

# Настройка логирования
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

BOOLEAN_CONVERTERS = ('_to_bool',)


def _add_field(parser: argparse.ArgumentParser, item: Field) -> None:
    if item.convert.__name__ in BOOLEAN_CONVERTERS:
        parser.add_argument(item.flag, dest=item.name, action=argparse.BooleanOptionalAction, default=None,
                            help=item.help)
    else:
        parser.add_argument(item.flag, dest=item.name, default=None, help=item.help)


def build_parser() -> argparse.ArgumentParser:
    """Парсер с подкомандами; все значения по умолчанию None, чтобы отличать заданные флаги"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None, help='Файл конфигурации key=value')
    for item in COMMON_FIELDS:
        _add_field(common, item)

    parser = argparse.ArgumentParser(
        prog='vecchia-sampler',
        description='Байесовская подгонка гауссовских процессов с правдоподобием Векки и минибатч MCMC',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command, parents=[common])
        for item in COMMAND_FIELDS[command]:
            _add_field(sub, item)
    subparsers.add_parser('presets', help='Показать предустановки simulate')
    return parser


def setup_handlers() -> dict:
    """Соответствие команд и обработчиков"""
    from handlers.correction_handler import cmd_correction_dist
    from handlers.fit_handler import cmd_fit
    from handlers.predict_handler import cmd_predict
    from handlers.score_handler import cmd_score
    from handlers.simulate_handler import cmd_simulate

    return {
        'simulate': cmd_simulate,
        'fit': cmd_fit,
        'predict': cmd_predict,
        'score': cmd_score,
        'correction-dist': cmd_correction_dist,
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Главная функция командной строки

    Returns:
        int: Код выхода (0 успех, 2 проверка, 3 численная ошибка, 4 ввод-вывод)
    """
    args = build_parser().parse_args(argv)
    if args.command == 'presets':
        print(format_preset_list(list_presets()))
        return 0
    flags ={key: value for key, value in vars(args).items() if key not in ('command', 'config')}

    try:
        config = load_run_config(args.command, flags, args.config)
        logging.getLogger().setLevel(config.log_level)
        logger.info(f"Команда {args.command}: конфигурация загружена успешно")
        setup_handlers()[args.command](config)
        return 0
    except SamplerError as e:
        logger.error(f"Ошибка команды {args.command}: {e}", exc_info=True)
        print(f"❌ {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"Ошибка ввода-вывода в команде {args.command}: {e}", exc_info=True)
        print(f"❌ {e}")
        return StorageError.exit_code


if __name__ == '__main__':
    sys.exit(main())
