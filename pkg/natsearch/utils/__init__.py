"""Utility modules for natsearch"""
