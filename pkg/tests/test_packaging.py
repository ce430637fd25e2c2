"""
Tests for the install manifests
"""

import re
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def requirement_names(lines):
    return {re.split(r"[<>=!~ ]", line.strip(), maxsplit=1)[0].lower()
            for line in lines if line.strip() and not line.startswith("#")}


class TestManifests:
    """Runtime requirements match setup.py and carry no dev tools"""

    def test_requirements_match_install_requires(self):
        runtime = requirement_names((ROOT / "requirements.txt").read_text().splitlines())
        setup = (ROOT / "setup.py").read_text()
        block = re.search(r"install_requires=\[(.*?)\]", setup, re.S).group(1)
        declared = requirement_names(re.findall(r'"([^"]+)"', block))
        assert runtime == declared

    def test_dev_tools_only_in_extras(self):
        runtime = requirement_names((ROOT / "requirements.txt").read_text().splitlines())
        assert not runtime & {"pytest", "black", "flake8", "pre-commit"}
