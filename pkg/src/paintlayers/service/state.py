"""In-memory session and solve-job state behind the HTTP facade.

Sessions serialize their mutating operations with a per-session lock; solve
jobs run on a bounded thread pool and publish per-level previews by copy.
"""

from __future__ import annotations

import os
import tempfile
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..compositor import LayerStack
from ..energy import AlphaStack, OrderedPalette
from ..errors import SolveCancelled
from ..geometry import ColorCloud, Polytope, collect_pixel_colors, exact_convex_hull
from ..palette import Palette
from ..solver import SolveOptions, build_pyramid, solve_alphas
from ..stack_io import save_layerstack

DONE_STATES = frozenset({"done", "cancelled", "failed"})
_STATE_RANK = {"queued": 0, "running": 1, "done": 2, "cancelled": 2, "failed": 2}


@dataclass
class LevelPreview:
    """Copied snapshot of one pyramid level's solution."""

    level: int
    width: int
    height: int
    energy: float
    alphas: AlphaStack


class SolveJob:
    """One asynchronous opacity solve; state transitions are monotone."""

    def __init__(self, ordered_palette: OrderedPalette, options: SolveOptions):
        self.id = uuid.uuid4().hex
        self.ordered_palette = ordered_palette
        self.options = options
        self.state = "queued"
        self.level: Optional[int] = None
        self.level_count: Optional[int] = None
        self.width: Optional[int] = None
        self.height: Optional[int] = None
        self.energy: Optional[float] = None
        self.error: Optional[str] = None
        self.previews: list[LevelPreview] = []
        self.result: Optional[LayerStack] = None
        self.result_dir: Optional[Path] = None
        self.cancel_event = threading.Event()
        self.lock = threading.Lock()

    def transition(self, new_state: str) -> bool:
        with self.lock:
            if _STATE_RANK[new_state] < _STATE_RANK[self.state] or self.state in DONE_STATES:
                return False
            self.state = new_state
            return True

    def publish_preview(self, level: int, width: int, height: int,
                        stack: AlphaStack, energy: float) -> None:
        preview = LevelPreview(
            level=level, width=width, height=height, energy=energy,
            alphas=AlphaStack(planes=stack.planes.copy()),
        )
        with self.lock:
            self.previews.append(preview)
            self.level = level
            self.width = width
            self.height = height
            self.energy = energy

    def latest_preview(self) -> Optional[LevelPreview]:
        with self.lock:
            return self.previews[-1] if self.previews else None

    def is_active(self) -> bool:
        with self.lock:
            return self.state in ("queued", "running")


@dataclass
class Session:
    """One uploaded image plus everything derived from it."""

    id: str
    image: np.ndarray  # float64 (H, W, 3|4), premultiplied when RGBA
    mode: str
    image_hash: str
    cloud: ColorCloud
    lock: threading.RLock = field(default_factory=threading.RLock)
    jobs: dict = field(default_factory=dict)
    current_palette: Optional[Palette] = None
    current_diagnostics: Optional[dict] = None
    current_hull: Optional[Polytope] = None
    _exact_hull: Optional[Polytope] = None
    _exact_hull_failed: bool = False

    @property
    def size(self) -> tuple[int, int]:
        return self.image.shape[1], self.image.shape[0]  # (width, height)

    def exact_hull(self) -> Optional[Polytope]:
        """Exact hull of the cloud, computed on first use; None if degenerate."""
        with self.lock:
            if self._exact_hull is None and not self._exact_hull_failed:
                try:
                    self._exact_hull = exact_convex_hull(self.cloud.rgb_only())
                except Exception:
                    self._exact_hull_failed = True
            return self._exact_hull

    def running_job(self) -> Optional[SolveJob]:
        with self.lock:
            for job in self.jobs.values():
                if job.is_active():
                    return job
            return None


class ServiceState:
    """All sessions plus the shared solve worker pool."""

    def __init__(
        self,
        workers: Optional[int] = None,
        data_dir: Optional[str] = None,
        max_upload_bytes: Optional[int] = None,
    ):
        if workers is None:
            workers = int(os.environ.get("DECOMPOSE_WORKERS", "2"))
        if data_dir is None:
            data_dir = os.environ.get("DECOMPOSE_DATA_DIR") or None
        if max_upload_bytes is None:
            max_upload_bytes = int(
                os.environ.get("DECOMPOSE_MAX_UPLOAD_BYTES", str(64 * 1024 * 1024))
            )
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()
        self.executor = ThreadPoolExecutor(max_workers=max(1, workers))
        self.data_dir = Path(data_dir) if data_dir else None
        self.max_upload_bytes = max_upload_bytes

    def add_session(
        self, image: np.ndarray, mode: str, image_hash: str, raw_png: Optional[bytes] = None
    ) -> Session:
        session = Session(
            id=uuid.uuid4().hex,
            image=image,
            mode=mode,
            image_hash=image_hash,
            cloud=collect_pixel_colors(image),
        )
        if self.data_dir is not None and raw_png is not None:
            upload_dir = self.data_dir / "sessions" / session.id
            upload_dir.mkdir(parents=True, exist_ok=True)
            (upload_dir / "upload.png").write_bytes(raw_png)
        with self.lock:
            self.sessions[session.id] = session
        return session

    def get_session(self, session_id: str) -> Optional[Session]:
        with self.lock:
            return self.sessions.get(session_id)

    def result_dir_for(self, session: Session, job: SolveJob) -> Path:
        if self.data_dir is not None:
            path = self.data_dir / "sessions" / session.id / "jobs" / job.id
            path.mkdir(parents=True, exist_ok=True)
            return path
        return Path(tempfile.mkdtemp(prefix=f"decompose-{job.id[:8]}-"))

    def submit(self, session: Session, job: SolveJob) -> None:
        self.executor.submit(run_solve_job, self, session, job)

    def shutdown(self) -> None:
        self.executor.shutdown(wait=False, cancel_futures=True)


def run_solve_job(state: ServiceState, session: Session, job: SolveJob) -> None:
    """Worker entry point: solve, publish previews, persist the result."""
    if not job.transition("running"):
        return
    try:
        job.level_count = len(build_pyramid(session.image, job.options.pyramid_min_dim))
        stack = solve_alphas(
            session.image,
            job.ordered_palette,
            job.options,
            progress_sink=job.publish_preview,
            should_cancel=job.cancel_event.is_set,
        )
        result = LayerStack(
            palette=job.ordered_palette,
            alphas=stack,
            source_image_hash=session.image_hash,
            params=job.options,
        )
        target = state.result_dir_for(session, job)
        save_layerstack(result, target)
        with job.lock:
            job.result = result
            job.result_dir = target
        job.transition("done")
    except SolveCancelled:
        job.transition("cancelled")
    except Exception as exc:  # surfaced verbatim through the status endpoint
        with job.lock:
            job.error = f"{type(exc).__name__}: {exc}"
        job.transition("failed")
