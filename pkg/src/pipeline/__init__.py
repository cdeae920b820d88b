"""Batch pipelines: benchmark protocols and circuit resynthesis"""
