from .experiment_base import BaseExperiment as BaseExperiment
from .experiment_base import ExperimentReport as ExperimentReport
from .experiment_registry import ExperimentRegistry as ExperimentRegistry

# importing the modules registers the experiments
from . import approx_ratio  # noqa: F401
from . import dvd_deadline_equiv  # noqa: F401
from . import fvs_deletion_probe  # noqa: F401
from . import subcube_joint  # noqa: F401
from . import subcube_stats  # noqa: F401
