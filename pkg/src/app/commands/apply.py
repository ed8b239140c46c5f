import argparse
import logging

from src.app.schemas.operators import OperatorKind, OperatorRequest
from src.app.schemas.run import RunConfig
from src.app.services import catalog_service, operator_service
from src.app.utils.artifacts import write_csv

logger = logging.getLogger(__name__)

NAME = "apply"
COLUMNS = ("y", "value", "error_estimate", "truncation_bound")


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(NAME, parents=parents, help="Evaluate H, I or I_lambda on a y grid (CSV)")
    parser.add_argument("--function", help="catalog label, e.g. const1, sin, poly:2")
    parser.add_argument("--operator", choices=[kind.value for kind in OperatorKind])
    parser.add_argument("--lam", type=float, help="λ for I_lambda")
    parser.add_argument("--y-grid", dest="y_grid", help="comma separated y values; a leading minus is fine, e.g. --y-grid=-1,0.3,2")
    parser.set_defaults(handler=handle, config_keys=("function", "operator", "lam", "y_grid", "output", "seed"))


def handle(config: RunConfig) -> int:
    phi = catalog_service.get_function(config.function)
    request = OperatorRequest(
        operator_kind=config.operator,
        function=phi,
        grid=config.grid(),
        cfg=config.pv_config(),
        lam=config.lam if config.operator == OperatorKind.I_LAMBDA else None,
    )
    rows = operator_service.evaluate_request(request)
    write_csv(
        config.output,
        COLUMNS,
        [(row.y, row.value, row.error_estimate, row.truncation_bound) for row in rows],
        config.header(),
    )
    return 0
