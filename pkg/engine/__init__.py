"""Session runtime, prompt rendering, replay and corpus build"""
