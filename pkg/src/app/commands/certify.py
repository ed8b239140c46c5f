import logging

from src.app.schemas.run import RunConfig
from src.app.services.certificate_service import CLAIMS, run_claim
from src.app.utils.artifacts import write_json
from src.app.utils.errors import CertificateFailure, ConfigError

logger = logging.getLogger(__name__)

NAME = "certify"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(NAME, parents=parents, help="Run claim certificates (JSON)")
    parser.add_argument("--claim", help=f"claim id, comma separated ids, or 'all' ({', '.join(CLAIMS)})")
    parser.set_defaults(handler=handle, config_keys=("claim", "output", "seed"))


def claim_ids(config: RunConfig) -> list[str]:
    if config.claim is None:
        raise ConfigError("certify needs a claim: --claim <id> or claim = <id> in the config file")
    if config.claim.strip() == "all":
        return list(CLAIMS)
    return [c.strip() for c in config.claim.split(",") if c.strip()]


def handle(config: RunConfig) -> int:
    ids = claim_ids(config)
    cfg = config.pv_config()
    certificates = [run_claim(claim_id, cfg, config.seed) for claim_id in ids]
    write_json(config.output, {"certificates": [c.to_json_dict() for c in certificates]}, config.header())

    failed = [c.claim_id for c in certificates if not c.passed]
    if failed:
        raise CertificateFailure(f"Certificates failed: {', '.join(failed)}")
    logger.info(f"All {len(certificates)} certificates passed")
    return 0
