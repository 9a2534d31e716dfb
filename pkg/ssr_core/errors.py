# ssr_core/errors.py
from __future__ import annotations


class SsrError(ValueError):
    """Base class for domain errors; `code` is what the CLI reports."""

    code = "ssr_error"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail or self.code

    def to_dict(self) -> dict:
        return {"error": self.code, "detail": self.detail}


class InvalidState(SsrError):
    code = "invalid_state"


class ZeroState(SsrError):
    code = "zero_state"


class EmptySector(SsrError):
    code = "empty_sector"


class TotalMismatch(SsrError):
    code = "total_mismatch"


class NotConvertible(SsrError):
    code = "not_convertible"


class ZeroProbability(SsrError):
    code = "zero_probability"


class DomainError(SsrError):
    code = "domain_error"


class EmptyTypicalSet(SsrError):
    code = "empty_typical_set"


class RankExceedsK(SsrError):
    code = "rank_exceeds_k"


class ZeroProjection(SsrError):
    code = "zero_projection"


class ChecksumMismatch(SsrError):
    code = "checksum_mismatch"
