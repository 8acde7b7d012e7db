"""Domain types and configuration models"""
