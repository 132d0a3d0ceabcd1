"""Distribution spec files: JSON or TOML, chosen by file extension."""

import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Union

from pydantic import ValidationError

from delaystab.distributions import DelayDistribution
from delaystab.errors import DistributionError, SpecFileError
from delaystab.models import SpecDocument, spec_of

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


def parse_spec(data: dict) -> DelayDistribution:
    try:
        return SpecDocument.model_validate(data).root.build()
    except ValidationError as exc:
        raise SpecFileError(f"invalid distribution spec: {exc.errors()[0]['msg']}") from exc
    except DistributionError as exc:
        raise SpecFileError(str(exc)) from exc


def load_spec(path: PathLike) -> DelayDistribution:
    path = Path(path)
    suffix = path.suffix.lower()
    try:
        if suffix == ".json":
            data = json.loads(path.read_text())
        elif suffix == ".toml":
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        else:
            raise SpecFileError(f"{path}: spec files must end in .json or .toml")
    except OSError as exc:
        raise SpecFileError(f"cannot read {path}: {exc}") from exc
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise SpecFileError(f"{path}: {exc}") from exc

    if not isinstance(data, dict):
        raise SpecFileError(f"{path}: top level must be an object")
    dist = parse_spec(data)
    log.debug("loaded %r from %s", dist, path)
    return dist


def dump_spec(dist: DelayDistribution) -> str:
    return spec_of(dist).model_dump_json()


def write_spec(dist: DelayDistribution, path: PathLike) -> None:
    Path(path).write_text(dump_spec(dist) + "\n")
