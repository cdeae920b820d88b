"""Numerical core: GF(2) algebra, circuits, .qc files and graph matching"""
