"""HTTP+JSON facade over the annotation pool.

Endpoints:
  GET  /task?rater=ID   one unrated tweet, or 204 when the pool is done
  POST /annotation      store a rating: 201, 409 duplicate, 422 invalid
  GET  /stats           rated / doubly_rated / agreement_rate
  GET  /export          agreed labeled corpus as JSONL
  /ui                   rating interface static assets, when built
"""

from pathlib import Path

from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .annotate import (
    Annotation,
    AnnotationError,
    AnnotationPool,
    DuplicateAnnotation,
    UnknownRater,
)


class AnnotationBody(BaseModel):
    tweet_id: int
    rater: str
    category: str
    sentiment: int | None = None


def make_app(pool: AnnotationPool, ui_dir=None):
    app = FastAPI(title="cohort-miner annotation service")

    @app.get("/task")
    def get_task(rater: str = Query(...)):
        try:
            rec = pool.next_task(rater)
        except UnknownRater as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        if rec is None:
            return Response(status_code=204)
        return JSONResponse(rec.to_json_dict())

    @app.post("/annotation")
    def post_annotation(body: AnnotationBody):
        ann = Annotation(
            tweet_id=body.tweet_id,
            rater_id=body.rater,
            category=body.category,
            sentiment=body.sentiment,
        )
        try:
            resolution = pool.submit(ann)
        except DuplicateAnnotation as exc:
            return JSONResponse({"error": str(exc)}, status_code=409)
        except AnnotationError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return JSONResponse({"status": resolution.status}, status_code=201)

    @app.get("/stats")
    def get_stats():
        return JSONResponse(pool.stats())

    @app.get("/export")
    def get_export():
        return PlainTextResponse(
            pool.export_jsonl(), media_type="application/x-ndjson"
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(pool, host="127.0.0.1", port=8000, ui_dir=None):
    import uvicorn

    uvicorn.run(make_app(pool, ui_dir=ui_dir), host=host, port=port)
