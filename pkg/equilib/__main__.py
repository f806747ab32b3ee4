"""Entry point for running equilib as a module."""

from .cli import main

if __name__ == "__main__":
    main()
