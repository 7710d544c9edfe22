from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from .api import routers
from .config import configure_logging, get_cors_origins

configure_logging()

app = FastAPI(title="Stable Area API")

app.add_middleware(
    CORSMiddleware,
    allow_origins=get_cors_origins(),
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.get("/")
def root():
    return {"status": "Stable Area API is running"}


for router in routers:
    app.include_router(router)
