# Тесты для сэмплера Векки
