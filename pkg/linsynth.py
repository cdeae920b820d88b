"""
linsynth entry point

    python linsynth.py synth data/fixtures/swap3.txt
"""
import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
