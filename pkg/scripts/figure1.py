"""Cumulative welfare of no training, revenue-optimal and welfare-optimal schemes as CSV."""

import sys

from genai_forum.cli import RunConfig, run
from genai_forum.model import example1_instance

if __name__ == "__main__":
    sys.stdout.write(run("figure1", RunConfig(example1_instance())))
