from src.app.schemas.run import RunConfig
from src.app.services import catalog_service
from src.app.utils.artifacts import write_csv

NAME = "catalog"
COLUMNS = ("label", "class", "growth_constant", "has_deriv", "has_antideriv", "description")


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(NAME, parents=parents, help="List the built-in test functions")
    parser.set_defaults(handler=handle, config_keys=("output",))


def handle(config: RunConfig) -> int:
    rows = [
        (
            phi.label,
            phi.claimed_class.describe(),
            phi.growth_constant,
            phi.deriv is not None,
            phi.antideriv is not None,
            phi.description,
        )
        for phi in catalog_service.list_functions()
    ]
    write_csv(config.output, COLUMNS, rows, config.header())
    return 0
