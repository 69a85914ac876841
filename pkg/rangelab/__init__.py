"""Лаборатория диапазона простого случайного блуждания на графах"""
