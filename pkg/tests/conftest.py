import os
import sys

# run against the source tree even without an install
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))
