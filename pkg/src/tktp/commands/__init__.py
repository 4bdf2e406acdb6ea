"""Command sets bound to the `tktp` group through their `__commands__`"""
