"""Persistent, append-only result cache keyed by content hashes.

One record per line: key-hash, property id, success flag, value, wall_time.
For failures the value column carries the failure reason. Partial trailing
lines (crash during write) are ignored on reload.
"""

from __future__ import annotations

import threading
from pathlib import Path

from ..errors import StoreError
from .base import Calculator, CalculatorResult, PropertyCacheKey, FAILURE_REASONS


class ResultCache:
    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[str, CalculatorResult] = {}
        self._hits = 0
        self._misses = 0
        if self.path.exists():
            self._load()

    def _load(self):
        try:
            text = self.path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StoreError(f"cannot read cache store {self.path}: {exc}") from exc
        for line in text.splitlines():
            fields = line.split("\t")
            if len(fields) != 5:
                continue  # partial or foreign line
            digest, prop, flag, value, wall = fields
            try:
                wall_time = float(wall)
                if flag == "1":
                    result = CalculatorResult.ok(float(value), wall_time)
                elif flag == "0" and value in FAILURE_REASONS:
                    result = CalculatorResult.fail(value, wall_time)
                else:
                    continue
            except ValueError:
                continue
            self._records[digest] = result

    def __len__(self) -> int:
        return len(self._records)

    @property
    def hits(self) -> int:
        return self._hits

    @property
    def misses(self) -> int:
        return self._misses

    def get(self, key: PropertyCacheKey) -> CalculatorResult | None:
        found = self._records.get(key.digest())
        if found is not None:
            self._hits += 1
        return found

    def put(self, key: PropertyCacheKey, result: CalculatorResult) -> None:
        digest = key.digest()
        value = f"{result.value:.17g}" if result.success else result.failure_reason
        line = "\t".join([digest, key.property_id, "1" if result.success else "0",
                          value, f"{result.wall_time:.6g}"])
        with self._lock:
            self._records[digest] = result
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def stats(self) -> dict:
        by_prop: dict[str, int] = {}
        failures = 0
        for rec in self._records.values():
            if not rec.success:
                failures += 1
        # property counts need the stored lines; recompute from the dict is
        # impossible (digest only), so track via reload
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                fields = line.split("\t")
                if len(fields) == 5:
                    by_prop[fields[1]] = by_prop.get(fields[1], 0) + 1
        return {"records": len(self._records), "failures": failures,
                "hits": self._hits, "misses": self._misses, "by_property": by_prop}


class CachedCalculator(Calculator):
    """Wraps a calculator with the persistent cache; hit -> no invocation."""

    def __init__(self, calculator: Calculator, cache: ResultCache):
        self.calculator = calculator
        self.cache = cache
        self.property_id = calculator.property_id
        self.calculator_id = calculator.calculator_id
        self.invocations = 0

    def compute(self, structure, composition) -> CalculatorResult:
        key = PropertyCacheKey.for_call(self.calculator, structure, composition)
        found = self.cache.get(key)
        if found is not None:
            return found
        self.cache._misses += 1
        self.invocations += 1
        result = self.calculator.compute(structure, composition)
        self.cache.put(key, result)
        return result
