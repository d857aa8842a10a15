#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Environment Variable Loader

This module loads the experiment runner's environment from .env files and
exposes the MOI_* settings it reads:

    MOI_LOG_LEVEL    logging level name (default WARNING)
    MOI_WORKERS      worker threads for trial execution (default 1)
    MOI_CONFIG_PATH  alternative experiment_config.yaml
"""

import os
import logging
from pathlib import Path
from typing import Dict, Optional

from dotenv import find_dotenv, load_dotenv

logger = logging.getLogger(__name__)

ENV_PREFIX = 'MOI_'


def load_environment(debug: bool = False) -> bool:
    """
    Load environment variables from a .env file.

    Searches the working directory (and its parents, via ``find_dotenv``) and
    then the project directory. Variables already set in the process
    environment take precedence over the file.

    Args:
        debug (bool): Whether to log where the file was found

    Returns:
        bool: True if a .env file was loaded, False otherwise
    """
    dotenv_path = find_dotenv(usecwd=True)
    if dotenv_path:
        if debug:
            logger.info(f"Loading environment from auto-detected path: {dotenv_path}")
        load_dotenv(dotenv_path, override=False)
        return True

    project_env = Path(__file__).parent / '.env'
    if project_env.exists():
        if debug:
            logger.info(f"Loading environment from: {project_env}")
        load_dotenv(project_env, override=False)
        return True

    if debug:
        logger.debug("No .env file found; using process environment only")
    return False


def environment_settings() -> Dict[str, Optional[str]]:
    """The MOI_* variables currently set, keyed without the prefix and lowercased."""
    return {
        key[len(ENV_PREFIX):].lower(): value
        for key, value in os.environ.items()
        if key.startswith(ENV_PREFIX) and value != ''
    }
