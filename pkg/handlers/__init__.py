# Пакет обработчиков команд
