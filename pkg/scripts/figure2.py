"""GenAI share under no training for a sweep of initial shares on the bistable example, as CSV."""

import sys

from genai_forum.cli import RunConfig, run
from genai_forum.model import example2_instance

P1 = tuple(i / 10 for i in range(11))

if __name__ == "__main__":
    sys.stdout.write(run("figure2", RunConfig(example2_instance(), p1_values=P1)))
