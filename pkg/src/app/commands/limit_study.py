import logging

from src.app.schemas.run import RunConfig
from src.app.services import catalog_service, scaling_service
from src.app.utils.artifacts import write_csv, write_json
from src.app.utils.errors import ConfigError, NoiseDominatedError

logger = logging.getLogger(__name__)

NAME = "limit-study"
COLUMNS = ("lambda", "E", "E_sqrt_lambda")


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        NAME, parents=parents,
        help="Measure E(λ) = ||I_λ φ - ∫_0^y φ|| over a λ sweep (CSV table + JSON rate fit)",
    )
    parser.add_argument("--function", help="catalog label with an antiderivative")
    parser.add_argument("--lambda-list", dest="lambda_list", help="comma separated λ values")
    parser.add_argument("--y-grid", dest="y_grid", help="comma separated y values in (0, Y]")
    parser.add_argument("--m", type=int, help="weight exponent; defaults to the function's class")
    parser.set_defaults(handler=handle, config_keys=("function", "lambda_list", "y_grid", "m", "output", "seed"))


def handle(config: RunConfig) -> int:
    if config.output is not None and config.output.suffix.lower() == ".json":
        raise ConfigError(f"--output cannot end in .json; the rate fit is written there: {config.output}")
    phi = catalog_service.get_function(config.function)
    grid = config.grid()
    m = phi.claimed_class.m if config.m is None else config.m
    ys = [y for y in grid.y_grid if y > 0]
    fit = scaling_service.measure_scaling_limit(phi, grid.lambda_list, ys, m, config.pv_config())

    # the table goes to `output`, the fit next to it with a .json suffix
    json_path = None if config.output is None else config.output.with_suffix(".json")
    write_csv(config.output, COLUMNS, zip(fit.lambdas, fit.errors, fit.scaled_errors), config.header())
    write_json(json_path, {"function": phi.label, "m": m, "rate_fit": fit.model_dump(mode="json")}, config.header())

    if fit.noise_dominated:
        raise NoiseDominatedError(f"Quadrature budget exceeds the noise fraction of E(λ) for '{phi.label}'")
    logger.info(f"{phi.label}: slope {fit.slope:.3f}, r² {fit.r_squared:.4f}")
    return 0
