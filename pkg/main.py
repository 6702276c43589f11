"""Run the fatigue toolkit CLI from a source checkout: `python main.py matpoint config/elastic_check.ini`."""

from src.apps.cli import cli

if __name__ == "__main__":
    cli(prog_name="fatigue")
