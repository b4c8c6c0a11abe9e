"""Pipeline manifest: artifact checksums and stage completion flags.

Each stage records the checksums of the files it wrote; a later stage
refuses to run when the checksum of an input no longer matches what the
manifest recorded, so results can always be traced to exact inputs.
"""

import hashlib
import json
import os
from pathlib import Path


class ManifestError(RuntimeError):
    pass


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class PipelineManifest:
    def __init__(self, path):
        self.path = Path(path)
        self.artifacts = {}
        self.stages = {}
        if self.path.exists():
            payload = json.loads(self.path.read_text("utf-8"))
            self.artifacts = payload.get("artifacts", {})
            self.stages = payload.get("stages", {})

    def save(self):
        payload = {"artifacts": self.artifacts, "stages": self.stages}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", "utf-8"
        )

    def _relative(self, path):
        """Paths are stored relative to the manifest so data dirs relocate."""
        try:
            return os.path.relpath(path, self.path.parent)
        except ValueError:  # different drive
            return str(path)

    def record_artifact(self, name, path):
        self.artifacts[name] = {
            "path": self._relative(path),
            "sha256": sha256_file(path),
        }

    def verify_input(self, name, path):
        """Raise when a recorded artifact has changed on disk.

        Only paths the manifest actually recorded under this name are
        checked; pointing a stage at a different file is a fresh input.
        """
        entry = self.artifacts.get(name)
        if entry is None or self._relative(path) != entry["path"]:
            return
        actual = sha256_file(path)
        if actual != entry["sha256"]:
            raise ManifestError(
                f"input {name!r} at {path} does not match the manifest "
                f"(expected sha256 {entry['sha256'][:12]}..., got {actual[:12]}...)"
            )

    def complete_stage(self, stage, **info):
        self.stages[stage] = {"completed": True, **info}
