"""HTTP service surface: pydantic schemas, handlers, FastAPI app factory."""
