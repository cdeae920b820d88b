"""Synthesis methods: DaCSynth, greedy, baselines, ancilla and the portfolio"""
