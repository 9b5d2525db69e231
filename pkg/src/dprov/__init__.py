"""Privacy-preserving provision of vehicular accident data.

Anonymous batched uploads, policy-gated encryption opened by constant-size
aggregated warrants, decentralized warrant issuance and delta updates, and
authority-side tracing of leaked responses — all over a deterministic
in-process simulation suitable for protocol analysis and benchmarking.
"""

from .group import (
    Curve,
    InvalidPointError,
    OpCount,
    Point,
    Scalar,
    count_group_ops,
    get_curve,
)
from .params import MasterSecrets, PublicParams, build_public_params, generate_master_secrets
from .policycrypt import (
    AccessDenied,
    AccessPolicy,
    AccessResponse,
    CipherCore,
    DecryptionError,
    MalformedLeak,
    PermissionSet,
    dacm_decrypt,
    dacm_encrypt,
    ta_mask,
    trace,
)
from .batchsig import (
    UploadSignature,
    pbvm_batch_verify,
    pbvm_isolate_invalid,
    pbvm_sign,
    rsu_keypair,
)
from .warrants import (
    IssuanceError,
    PartialWarrant,
    UnknownPseudonym,
    Warrant,
    WIState,
    in_aggregate,
    in_apply_update,
    wi_blind_exchange,
    wi_issue_partial,
    wi_update_partial,
)
from .envelope import IntegrityError, KeyPair, env_decrypt, env_encrypt, env_keygen
from .bus import FaultRule, SimBus, TrafficRecord
from .store import RecordStore, StoredRecord
from .sim import (
    ConfigError,
    SimConfig,
    SystemState,
    phase_access,
    phase_issue_warrant,
    phase_trace,
    phase_update,
    phase_upload,
    setup_system,
)
from .bench import BenchRow, bench_batch, bench_warrant, read_csv, write_csv

__version__ = "0.1.0"

__all__ = [
    "AccessDenied",
    "AccessPolicy",
    "AccessResponse",
    "BenchRow",
    "CipherCore",
    "ConfigError",
    "Curve",
    "DecryptionError",
    "FaultRule",
    "IntegrityError",
    "InvalidPointError",
    "IssuanceError",
    "KeyPair",
    "MalformedLeak",
    "MasterSecrets",
    "OpCount",
    "PartialWarrant",
    "PermissionSet",
    "Point",
    "PublicParams",
    "RecordStore",
    "Scalar",
    "SimBus",
    "SimConfig",
    "StoredRecord",
    "SystemState",
    "TrafficRecord",
    "UnknownPseudonym",
    "UploadSignature",
    "WIState",
    "Warrant",
    "bench_batch",
    "bench_warrant",
    "build_public_params",
    "count_group_ops",
    "dacm_decrypt",
    "dacm_encrypt",
    "env_decrypt",
    "env_encrypt",
    "env_keygen",
    "generate_master_secrets",
    "get_curve",
    "in_aggregate",
    "in_apply_update",
    "pbvm_batch_verify",
    "pbvm_isolate_invalid",
    "pbvm_sign",
    "phase_access",
    "phase_issue_warrant",
    "phase_trace",
    "phase_update",
    "phase_upload",
    "read_csv",
    "rsu_keypair",
    "setup_system",
    "ta_mask",
    "trace",
    "wi_blind_exchange",
    "wi_issue_partial",
    "wi_update_partial",
    "write_csv",
]
