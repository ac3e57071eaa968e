"""Report stage: plots and an index of what the run produced."""

import logging

from api.schemas import RunConfig
from core.errors import MissingArtifact
from services.plotting import PLOTS
from tools.common import get_store, stage_result

logger = logging.getLogger(__name__)

SUMMARIES = ("eval.json", "bound.json", "decode.json")


def build_report(config: RunConfig) -> dict:
    """
    Render an SVG for every metric table present and collect the summaries.

    Raises:
        MissingArtifact: if the output directory holds no evaluation artifacts.
    """
    store = get_store(config)
    tables = [name for name in PLOTS if store.exists(name)]
    summaries = [name for name in SUMMARIES if store.exists(name)]
    if not tables and not summaries:
        raise MissingArtifact(f"nothing to report in {store.path('')}; run eval, bound or decode first")

    artifacts = []
    for name in tables:
        rows = store.read_csv(name)
        if not rows:
            logger.warning("%s is empty, skipping its plot", name)
            continue
        svg, plot = PLOTS[name]
        artifacts.append(plot(rows, store.path(svg, "plots")))

    report = {
        "tables": tables,
        "plots": [str(p) for p in artifacts],
        **{name.removesuffix(".json"): store.read_json(name) for name in summaries},
    }
    artifacts.insert(0, store.write_json("report.json", report))
    store.write_metadata("report", config.model_dump(mode="json"))
    return stage_result("report", artifacts, {"tables": tables, "summaries": summaries})
