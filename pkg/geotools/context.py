"""Per-session execution context handed to every executor"""

import logging
from pathlib import Path
from typing import Any

from models.bundle import GeoBundle
from models.errors import IoFailure
from models.fixtures import FixtureStore
from models.utils import contained, fingerprint

logger = logging.getLogger(__name__)

RENDER_DIR = 'renders'


class ToolContext:
    """Owns the session work directory: geo bundles live there and are saved
    after every mutation, images and GeoTIFFs are read from the fixtures.

    :param fixtures: Read-only fixture store, shared between sessions
    :param workdir: Directory owned by this session only
    :param settings: Effective configuration (``index_classes``, ``search``)
    """

    def __init__(self, fixtures: FixtureStore, workdir: str | Path,
                 settings: dict[str, Any] | None = None):
        self.fixtures = fixtures
        self.workdir = Path(workdir)
        self.settings = dict(settings or {})
        self._bundles: dict[str, GeoBundle] = {}

    @property
    def index_classes(self) -> dict[str, Any]:
        return self.settings.get('index_classes') or {}

    @property
    def search(self) -> dict[str, Any]:
        return self.settings.get('search') or {}

    def bundle_path(self, ref: str) -> Path:
        """
        :raises PathEscape: ``ref`` leaves the work directory
        """
        return contained(self.workdir, ref)

    def bundle(self, ref: str) -> GeoBundle:
        """Bundle ``ref`` of the work directory. Loaded once per session

        :raises IoFailure: No such bundle
        :raises MissingMetadata: The bundle has no readable meta.json
        """
        if ref not in self._bundles:
            path = self.bundle_path(ref)
            if not path.is_dir():
                raise IoFailure(f'No geo bundle "{ref}" in the session')
            self._bundles[ref] = GeoBundle.load(path)
        return self._bundles[ref]

    def commit(self, ref: str, bundle: GeoBundle) -> None:
        """Makes ``bundle`` the current state of ``ref``, in memory and on disk"""
        bundle.save(self.bundle_path(ref))
        self._bundles[ref] = bundle
        logger.debug("Saved bundle %s (%s)", ref, ', '.join(bundle.layer_names()))

    def stage(self, ref: str) -> None:
        """Copies the fixture bundle ``ref`` into the work directory"""
        source = self.fixtures.resolve(ref)
        if not source.is_dir():
            raise IoFailure(f'No fixture bundle "{ref}"')
        GeoBundle.copy_tree(source, self.bundle_path(ref))
        self._bundles.pop(ref, None)

    def fixture_path(self, ref: str) -> Path:
        return self.fixtures.resolve(ref)

    def render_target(self, tool: str, args: dict[str, Any]) -> tuple[str, Path]:
        """(path reported in the observation, absolute path) of a render. Named
        after the call fingerprint, so equal calls write the same file"""
        relative = f'{RENDER_DIR}/{tool}_{fingerprint(tool, args)[:12]}.png'
        return relative, self.workdir / relative
