"""
Model stitching and multi-objective supernetwork search.

This package merges two trained neural networks into a supernetwork: layers
of the two parents whose outputs line up are matched, a trainable stitching
layer is inserted in both directions, and a switch in front of every matched
layer chooses between the original input and the stitched one. A genotype
fixes every switch; decoding it yields a recombined network whose accuracy
and multiply-adds are traded off by asynchronous evolutionary search.

Key Components:
- StitchingPipeline: coordinator running the steps as stages
- tensorcore: layer forward, backward and cost semantics on numpy arrays
- netgraph: immutable computation graphs and their container files
- synthdata: seeded synthetic tasks, parent presets and parent training
- stitcher: candidate matching, acyclic matching, supernetwork construction
  and stitch training
- phenotype: genotypes, decoding, evaluation skipping and calibration
- search: GA, GOMEA, LK-GOMEA and random search with an archive, steering,
  hypervolume and statistics
- api: FastAPI application over a trained supernetwork

Basic Usage:
    ```python
    import asyncio
    from stitchlab import StitchingPipeline, load_experiment_config

    config = load_experiment_config("desk.yaml")
    pipeline = StitchingPipeline(config)
    asyncio.run(pipeline.prepare())
    result = asyncio.run(pipeline.search())
    print(result.data["summary"])
    ```

From the command line:
    ```bash
    python main.py prepare --output-dir runs/desk
    python main.py search --algo gomea --budget 2000 --deterministic
    ```
"""

from .config import ExperimentConfig, RunConfig, load_experiment_config
from .errors import StitchLabError
from .pipeline import StitchingPipeline

__version__ = "1.0.0"

__all__ = [
    'ExperimentConfig',
    'RunConfig',
    'StitchLabError',
    'StitchingPipeline',
    'load_experiment_config',
]
