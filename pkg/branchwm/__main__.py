"""Entry point for python -m branchwm."""

from branchwm.cli import main

if __name__ == "__main__":
    main()
