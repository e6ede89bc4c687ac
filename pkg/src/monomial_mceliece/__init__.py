"""McEliece with monomial QC codes, its reaction attack, and full-spectrum defences."""

from .crypto_scheme import (
    PRESETS,
    DecoderConfig,
    DecodingFailure,
    DfrEstimate,
    KeyGenError,
    PrivateKey,
    PublicKey,
    SchemeParams,
    bit_flip_decode,
    bit_flip_decode_batch,
    decrypt,
    decrypt_batch,
    encrypt,
    encrypt_batch,
    estimate_dfr,
    keygen,
    preset_params,
)
from .monomial_code import (
    ConstructionSecret,
    DistanceSpectrum,
    ExponentMatrix,
    build_exponent_matrix,
    count_candidates_log2,
    distance,
    distance_spectrum,
    is_full_spectrum,
    random_monomial,
    row_equivalent,
    standard_form,
)
from .qc_algebra import CircPoly, QcMatrix

__version__ = "0.1.0"
