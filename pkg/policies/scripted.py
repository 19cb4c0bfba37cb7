"""Plays a stored trajectory back, one step per call"""

from engine.prompt import render_action
from models.errors import ScriptExhausted
from models.trajectory import TrajectoryRecord, WorkingMemory


class ScriptedPolicy:
    """Index playback of a record, rendered in the action wire format. The
    memory it is handed is never read"""
    kind = 'scripted'

    def __init__(self, trajectory: TrajectoryRecord):
        self.trajectory = trajectory
        self.script = [render_action(step.as_action()) for step in trajectory.steps]
        self.cursor = 0

    def next_action(self, memory: WorkingMemory | None = None) -> str:
        if self.cursor >= len(self.script):
            raise ScriptExhausted(
                f'{self.trajectory.id} has {len(self.script)} step(s), asked for step {self.cursor + 1}')
        text = self.script[self.cursor]
        self.cursor += 1
        return text

    def reset(self) -> None:
        self.cursor = 0
