"""Exception hierarchy shared across the package."""


class SceneForgeError(Exception):
    """Base class for all package errors."""


class SceneFormatError(SceneForgeError):
    """Scene JSON or scene invariant violation; message names the offending path."""


class ManifestError(SceneForgeError):
    """Asset/material manifest problem (duplicate id, missing mesh, bad record)."""


class MeshError(SceneForgeError):
    """Invalid triangle mesh (bad index, degenerate triangle, malformed OBJ)."""


class LayoutError(SceneForgeError):
    """Room layout spec violates its invariants."""


class ActionParseError(SceneForgeError):
    """Action program text failed to parse."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, col {column}: {message}" if line else message)
        self.line = line
        self.column = column


class BackendError(SceneForgeError):
    """Remote policy/scorer backend failed after exhausting retries."""
