"""
Entry point for the Hénon map workbench.
"""
import sys
from pathlib import Path


def run() -> int:
    """Run the CLI with the project root on the Python path."""
    project_root = Path(__file__).parent
    sys.path.append(str(project_root))

    from src.cli.main import main
    return main()


if __name__ == "__main__":
    sys.exit(run())
