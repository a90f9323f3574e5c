"""FastAPI routes for the interactive decomposition service."""

from __future__ import annotations

import base64
import io
import os
import zipfile
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from PIL import Image

from ..compositor import LayerStack, composite_stack, quantize_to_uint8, recolor
from ..energy import MODE_RGBA, OrderedPalette
from ..errors import (
    DecompositionError,
    DegenerateGeometryError,
    UnsupportedImageError,
)
from ..palette import SimplifyParams, remove_color, simplify_palette
from ..solver import SolveOptions
from ..stack_io import image_hash, load_image
from .schemas import (
    HullMesh,
    JobCreated,
    JobRequest,
    JobStatus,
    LayerPreview,
    PaletteDiagnostics,
    PaletteResponse,
    PreviewResponse,
    RecolorRequest,
    SessionCreated,
    SimplifyParamsModel,
)
from .state import LevelPreview, ServiceState, Session, SolveJob

CLOUD_SAMPLE_CAP = 20_000


def _png_base64(array: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(array).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _composite_png(stack: LayerStack) -> np.ndarray:
    return quantize_to_uint8(composite_stack(stack))


def _palette_response(session: Session, params: SimplifyParamsModel | None) -> PaletteResponse:
    with session.lock:
        palette = session.current_palette
        diag = session.current_diagnostics or {}
        hull = session.current_hull
    mesh = None
    if hull is not None:
        mesh = HullMesh(vertices=hull.vertices.tolist(), faces=hull.faces.tolist())

    cloud = session.cloud.rgb_only()
    points = cloud.points
    if len(points) > CLOUD_SAMPLE_CAP:
        rng = np.random.default_rng(0)
        weights = cloud.counts / cloud.counts.sum()
        idx = rng.choice(len(points), size=CLOUD_SAMPLE_CAP, replace=False, p=weights)
        points = points[idx]

    return PaletteResponse(
        colors=np.rint(palette.colors).astype(int).tolist(),
        background_index=palette.background_index,
        source=palette.source,
        params=params,
        diagnostics=PaletteDiagnostics(
            **{k: v for k, v in diag.items() if k in PaletteDiagnostics.model_fields}
        ),
        hull=mesh,
        cloud_sample=np.rint(points).astype(int).tolist(),
    )


def _job_status(job: SolveJob) -> JobStatus:
    with job.lock:
        return JobStatus(
            id=job.id,
            state=job.state,
            level=job.level,
            level_count=job.level_count,
            width=job.width,
            height=job.height,
            energy=job.energy,
            error=job.error,
        )


def _preview_response(preview: LevelPreview, palette: OrderedPalette) -> PreviewResponse:
    stack = LayerStack(palette=palette, alphas=preview.alphas)
    layers = []
    colors = np.rint(palette.colors).astype(int)
    for i in range(palette.layer_count):
        plane = quantize_to_uint8(preview.alphas.planes[i] * 255.0)
        layers.append(
            LayerPreview(
                index=i + 1,
                color=colors[i + 1].tolist(),
                alpha_png_base64=_png_base64(plane),
            )
        )
    return PreviewResponse(
        level=preview.level,
        width=preview.width,
        height=preview.height,
        energy=preview.energy,
        composite_png_base64=_png_base64(_composite_png(stack)),
        layers=layers,
    )


def create_app(state: ServiceState | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        app.state.service.shutdown()

    app = FastAPI(title="paintlayers", version="0.1.0", lifespan=lifespan)
    app.state.service = state or ServiceState()

    def service() -> ServiceState:
        return app.state.service

    def get_session(session_id: str) -> Session:
        session = service().get_session(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    def get_job(session: Session, job_id: str) -> SolveJob:
        with session.lock:
            job = session.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
        return job

    def reject_if_solving(session: Session) -> None:
        if session.running_job() is not None:
            raise HTTPException(status_code=409, detail="a solve job is running")

    @app.post("/sessions", response_model=SessionCreated, status_code=201)
    async def create_session(image: UploadFile = File(...)) -> SessionCreated:
        data = await image.read()
        if len(data) > service().max_upload_bytes:
            raise HTTPException(status_code=413, detail="upload exceeds the size limit")
        try:
            pixels, mode = load_image(data)
        except UnsupportedImageError as exc:
            raise HTTPException(status_code=415, detail=str(exc)) from exc
        session = service().add_session(pixels, mode, image_hash(pixels), raw_png=data)
        width, height = session.size
        return SessionCreated(session_id=session.id, width=width, height=height, mode=mode)

    @app.post("/sessions/{session_id}/palette", response_model=PaletteResponse)
    def compute_palette(session_id: str, params: SimplifyParamsModel) -> PaletteResponse:
        session = get_session(session_id)
        reject_if_solving(session)
        try:
            simplify = SimplifyParams(**params.model_dump())
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        try:
            palette, hull, diagnostics = simplify_palette(
                session.cloud, simplify, exact_hull=session.exact_hull()
            )
        except DegenerateGeometryError as exc:
            raise HTTPException(
                status_code=422,
                detail=f"degenerate color cloud (affine dimension {exc.dimension}): {exc}",
            ) from exc
        except (DecompositionError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with session.lock:
            session.current_palette = palette
            session.current_hull = hull
            session.current_diagnostics = diagnostics
        return _palette_response(session, params)

    @app.delete("/sessions/{session_id}/palette/colors/{index}", response_model=PaletteResponse)
    def delete_palette_color(session_id: str, index: int) -> PaletteResponse:
        session = get_session(session_id)
        reject_if_solving(session)
        with session.lock:
            if session.current_palette is None:
                raise HTTPException(status_code=409, detail="no palette computed yet")
            try:
                session.current_palette = remove_color(session.current_palette, index)
            except IndexError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        return _palette_response(session, None)

    @app.post("/sessions/{session_id}/jobs", response_model=JobCreated, status_code=202)
    def create_job(session_id: str, request: JobRequest) -> JobCreated:
        session = get_session(session_id)
        with session.lock:
            if session.current_palette is None:
                raise HTTPException(status_code=409, detail="no palette computed yet")
            if session.running_job() is not None:
                raise HTTPException(status_code=409, detail="a solve job is already running")
            palette = session.current_palette
            order = request.order
            if sorted(order) != list(range(len(palette))):
                raise HTTPException(
                    status_code=422,
                    detail=f"order must be a permutation of 0..{len(palette) - 1}",
                )
            if request.background_index is not None and request.background_index != order[0]:
                raise HTTPException(
                    status_code=422,
                    detail="background_index must equal the first entry of order",
                )
            try:
                if session.mode == MODE_RGBA:
                    # transparent background; every palette color is a layer
                    colors = np.vstack([np.zeros(3), palette.colors[order]])
                    ordered = OrderedPalette(colors=colors, mode=MODE_RGBA)
                else:
                    ordered = OrderedPalette(colors=palette.colors[order])
                options = SolveOptions(**request.options.model_dump())
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            job = SolveJob(ordered_palette=ordered, options=options)
            session.jobs[job.id] = job
        service().submit(session, job)
        return JobCreated(job_id=job.id)

    @app.get("/sessions/{session_id}/jobs/{job_id}", response_model=JobStatus)
    def job_status(session_id: str, job_id: str) -> JobStatus:
        return _job_status(get_job(get_session(session_id), job_id))

    @app.get(
        "/sessions/{session_id}/jobs/{job_id}/previews/latest",
        response_model=PreviewResponse,
    )
    def latest_preview(session_id: str, job_id: str) -> PreviewResponse:
        job = get_job(get_session(session_id), job_id)
        preview = job.latest_preview()
        if preview is None:
            raise HTTPException(status_code=404, detail="no preview available yet")
        return _preview_response(preview, job.ordered_palette)

    @app.post("/sessions/{session_id}/jobs/{job_id}/cancel", response_model=JobStatus)
    def cancel_job(session_id: str, job_id: str) -> JobStatus:
        job = get_job(get_session(session_id), job_id)
        if not job.is_active():
            raise HTTPException(status_code=409, detail=f"job is already {job.state}")
        job.cancel_event.set()
        job.transition("cancelled")
        return _job_status(job)

    @app.get("/sessions/{session_id}/jobs/{job_id}/result")
    def job_result(session_id: str, job_id: str) -> Response:
        job = get_job(get_session(session_id), job_id)
        with job.lock:
            if job.state != "done" or job.result_dir is None:
                state_now = job.state
                raise HTTPException(status_code=409, detail=f"job is {state_now}, not done")
            result_dir = job.result_dir
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_DEFLATED) as archive:
            for path in sorted(Path(result_dir).iterdir()):
                archive.write(path, arcname=path.name)
        return Response(
            content=buf.getvalue(),
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="layers-{job_id}.zip"'},
        )

    @app.post("/sessions/{session_id}/jobs/{job_id}/recolor")
    def recolor_preview(session_id: str, job_id: str, request: RecolorRequest) -> Response:
        job = get_job(get_session(session_id), job_id)
        with job.lock:
            if job.state != "done" or job.result is None:
                raise HTTPException(status_code=409, detail=f"job is {job.state}, not done")
        if any(not 0 <= c <= 255 for c in request.new_color):
            raise HTTPException(status_code=422, detail="color channels must be in 0..255")
        preview = job.latest_preview()
        stack = LayerStack(palette=job.ordered_palette, alphas=preview.alphas)
        try:
            edited = recolor(stack, request.layer_index, np.asarray(request.new_color, float))
        except IndexError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        png = io.BytesIO()
        Image.fromarray(_composite_png(edited)).save(png, format="PNG")
        return Response(content=png.getvalue(), media_type="image/png")

    ui_dir = os.environ.get("DECOMPOSE_UI_DIR")
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
