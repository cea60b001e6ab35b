# Пакет сэмплера Векки
