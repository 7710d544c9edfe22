import logging
import os

from dotenv import load_dotenv

load_dotenv(os.path.join(os.path.dirname(__file__), "..", ".env"))

LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"
LOG_LEVEL = os.getenv("STABLE_AREA_LOG_LEVEL", "WARNING").upper()

DEFAULT_SEED = int(os.getenv("STABLE_AREA_SEED", "20240517"))
DEFAULT_HORIZON = float(os.getenv("STABLE_AREA_HORIZON", "50"))
CACHE_ENABLED = os.getenv("STABLE_AREA_CACHE", "1") not in ("0", "false", "False", "")


def default_threads() -> int:
    raw = os.getenv("STABLE_AREA_THREADS", "")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logging.getLogger(__name__).warning("ignoring STABLE_AREA_THREADS=%r", raw)
    return 1


def get_cors_origins():
    origins = os.getenv("CORS_ORIGINS", "")
    if origins:
        return [origin.strip() for origin in origins.split(",") if origin.strip()]
    return ["http://localhost:5173", "http://localhost:3000"]


def configure_logging(level: str | None = None) -> None:
    root = logging.getLogger("stable_area")
    if not any(getattr(h, "_stable_area", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._stable_area = True
        root.addHandler(handler)
    root.setLevel((level or LOG_LEVEL).upper())
