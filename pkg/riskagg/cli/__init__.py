"""CLI modules for risk region aggregation experiments"""
