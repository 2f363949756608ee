# This software is released under the GNU General Public License v3.0
# https://opensource.org/licenses/GPL-3.0
import logging
import os
import sys
import time
from datetime import timedelta
from pathlib import Path
from typing import List, Optional, Union

import humanize  # type: ignore
import requests

default_retry_attempts = 1
default_retry_wait_interval = 2
default_fetch_timeout = 60


def get_logger(logger: Optional[logging.Logger] = None) -> logging.Logger:
    """
    Return logger, or a stdout logger at INFO if none is given

    :param logger:
    :return:
    """
    if logger:
        return logger
    logger = logging.getLogger(__file__)
    if not logger.handlers:
        ch = logging.StreamHandler(sys.stdout)
        ch.setLevel(logging.DEBUG)
        logger.addHandler(ch)
        logger.setLevel(logging.INFO)
    return logger


def get_env_csv(key: str) -> List[str]:
    # get csv format env values
    values: List[str] = []
    try:
        values = [r.strip() for r in str(os.environ[key]).split(",") if r.strip()]
    except (KeyError, ValueError):
        pass
    return values


def get_env_bool(key: str) -> bool:
    try:
        return str(os.environ[key]).strip().lower() == "true"
    except (KeyError, ValueError):
        return False


def get_env_int(key: str, default: int) -> int:
    try:
        return int(str(os.environ[key]).strip())
    except (KeyError, ValueError):
        return default


def format_duration_ns(wall_time_ns: float) -> str:
    return humanize.precisedelta(
        timedelta(microseconds=wall_time_ns / 1000.0),
        minimum_unit="microseconds",
        format="%0.1f",
    )


def format_throughput(pts_per_s: float) -> str:
    return f"{humanize.intword(int(pts_per_s))} pts/s"


def is_url(path_or_url: Union[str, Path]) -> bool:
    return str(path_or_url).startswith(("http://", "https://"))


def read_source(path_or_url: Union[str, Path], logger=None) -> bytes:
    """
    Read a local file, or download it if given an http(s) url

    :param path_or_url:
    :param logger:
    :return:
    """
    logger = get_logger(logger)
    if not is_url(path_or_url):
        return Path(path_or_url).read_bytes()

    timeout = default_fetch_timeout
    for attempt in range(1 + default_retry_attempts):
        try:
            logger.debug(f'Downloading "{path_or_url}"...')
            res = requests.get(
                str(path_or_url),
                headers={"User-Agent": "Mozilla/5.0"},
                timeout=timeout,
            )
            res.raise_for_status()
            return res.content
        except (
            requests.exceptions.ReadTimeout,
            requests.exceptions.HTTPError,
            requests.exceptions.ConnectionError,
        ) as err:
            if attempt < default_retry_attempts:
                logger.warning(
                    f"{err.__class__.__name__} downloading {path_or_url}. "
                    f"Retrying after {default_retry_wait_interval}s..."
                )
                timeout += 30
                time.sleep(default_retry_wait_interval)
                continue
            raise
    return b""
