"""Binary model files.

Layout: the magic ``LVCK``, a little-endian u16 format version, then
five length-prefixed stage blocks in pipeline order (preprocess,
augment, extract, transform, classify), then a SHA-256 digest of
everything before it.  Each stage block is a u32-length-prefixed JSON
header followed by the raw bytes of its arrays as little-endian
float64 in C order; the header lists array names and shapes, so the
payload length is fully determined.

Loading verifies the magic, version, digest, every declared length,
and that nothing trails the digest.  Stored filter banks are used
as-is on load rather than re-derived from seeds, so a model file keeps
scoring identically even if filter initialization ever changes.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .convnet import ConvLayerConfig, ConvNetConfig
from .lbp import LbpConfig
from .pipeline import PipelineConfig, PreprocessConfig, TrainedPipeline, TransformConfig
from .svm import SvmModel, SvmParams
from .transform import PcaModel, Standardizer

__all__ = ["MAGIC", "FORMAT_VERSION", "model_bytes", "model_from_bytes", "save_model", "load_model", "model_digest"]

MAGIC = b"LVCK"
FORMAT_VERSION = 1

_STAGE_ORDER = ("preprocess", "augment", "extract", "transform", "classify")


def _encode_stage(header: dict, arrays: list[tuple[str, np.ndarray]]) -> bytes:
    header = dict(header)
    header["arrays"] = [{"name": name, "shape": list(arr.shape)} for name, arr in arrays]
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = b"".join(np.ascontiguousarray(arr, dtype="<f8").tobytes() for _, arr in arrays)
    return struct.pack("<I", len(head)) + head + body


def _decode_stage(payload: bytes, stage: str) -> tuple[dict, dict[str, np.ndarray]]:
    if len(payload) < 4:
        raise ValueError(f"corrupt model file: stage {stage} too short")
    (head_len,) = struct.unpack_from("<I", payload, 0)
    if 4 + head_len > len(payload):
        raise ValueError(f"corrupt model file: stage {stage} header overruns block")
    try:
        header = json.loads(payload[4 : 4 + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"corrupt model file: stage {stage} header unreadable") from exc
    arrays: dict[str, np.ndarray] = {}
    offset = 4 + head_len
    for spec in header.get("arrays", ()):
        shape = tuple(int(s) for s in spec["shape"])
        if any(s < 0 for s in shape):
            raise ValueError(f"corrupt model file: stage {stage} declares a negative shape")
        nbytes = int(np.prod(shape, dtype=np.int64)) * 8
        if offset + nbytes > len(payload):
            raise ValueError(f"corrupt model file: stage {stage} array {spec['name']} truncated")
        flat = np.frombuffer(payload, dtype="<f8", count=nbytes // 8, offset=offset)
        arrays[spec["name"]] = flat.reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(payload):
        raise ValueError(f"corrupt model file: stage {stage} has trailing bytes")
    return header, arrays


def _extract_stage(pipeline: TrainedPipeline) -> bytes:
    extractor = pipeline.config.extractor
    if isinstance(extractor, LbpConfig):
        header = {"method": "lbp", "variant": extractor.variant, "blocks": list(extractor.blocks)}
        return _encode_stage(header, [])
    header = {
        "method": "convnet",
        "layers": [
            {
                "num_filters": layer.num_filters,
                "filter_size": layer.filter_size,
                "pool_size": layer.pool_size,
                "pool_stride": layer.pool_stride,
                "lcn_window": layer.lcn_window,
                "seed": layer.seed,
            }
            for layer in extractor.layers
        ],
    }
    arrays = [(f"bank{i}", bank) for i, bank in enumerate(pipeline.banks)]
    return _encode_stage(header, arrays)


def model_bytes(pipeline: TrainedPipeline) -> bytes:
    """Serialize a trained pipeline; same pipeline, same bytes."""
    pre = pipeline.config.preprocess
    stages = [
        _encode_stage(
            {
                "scale": pre.scale,
                "filter": pre.filter,
                "roi": pre.roi,
                "equalize": pre.equalize,
                "clahe_tiles": list(pre.clahe_tiles),
                "clahe_clip": pre.clahe_clip,
                "seed": pipeline.config.seed,
            },
            [],
        ),
        _encode_stage({"enabled": pipeline.config.augmented}, []),
        _extract_stage(pipeline),
        _encode_stage(
            {
                "pca_fraction": pipeline.config.transform.pca_fraction,
                "whiten": pipeline.pca.whiten,
                "epsilon": pipeline.pca.epsilon,
            },
            [
                ("feature_means", pipeline.standardizer.means),
                ("feature_stds", pipeline.standardizer.stds),
                ("pca_mean", pipeline.pca.mean),
                ("components", pipeline.pca.components),
                ("component_variances", pipeline.pca.component_variances),
            ],
        ),
        _encode_stage(
            {
                "C": pipeline.config.classifier.C,
                "gamma": pipeline.config.classifier.gamma,
                "tol": pipeline.config.classifier.tol,
                "max_passes": pipeline.config.classifier.max_passes,
                "bias": pipeline.classifier.bias,
            },
            [
                ("support_vectors", pipeline.classifier.support_vectors),
                ("dual_coefs", pipeline.classifier.dual_coefs),
            ],
        ),
    ]
    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", FORMAT_VERSION)
    for block in stages:
        out += struct.pack("<Q", len(block))
        out += block
    out += hashlib.sha256(bytes(out)).digest()
    return bytes(out)


def model_from_bytes(data: bytes) -> TrainedPipeline:
    """Parse and verify a model byte stream back into a pipeline."""
    if len(data) < len(MAGIC) + 2 + 32:
        raise ValueError("corrupt model file: too short")
    if data[: len(MAGIC)] != MAGIC:
        raise ValueError(f"corrupt model file: bad magic {data[:4]!r}")
    (version,) = struct.unpack_from("<H", data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version}")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise ValueError("corrupt model file: checksum mismatch")

    offset = len(MAGIC) + 2
    blocks = []
    for stage in _STAGE_ORDER:
        if offset + 8 > len(body):
            raise ValueError(f"corrupt model file: missing stage {stage}")
        (length,) = struct.unpack_from("<Q", body, offset)
        offset += 8
        if offset + length > len(body):
            raise ValueError(f"corrupt model file: stage {stage} overruns file")
        blocks.append(body[offset : offset + length])
        offset += length
    if offset != len(body):
        raise ValueError("corrupt model file: trailing bytes after last stage")

    pre_h, _ = _decode_stage(blocks[0], "preprocess")
    aug_h, _ = _decode_stage(blocks[1], "augment")
    ext_h, ext_arrays = _decode_stage(blocks[2], "extract")
    tr_h, tr_arrays = _decode_stage(blocks[3], "transform")
    cl_h, cl_arrays = _decode_stage(blocks[4], "classify")

    preprocess = PreprocessConfig(
        scale=float(pre_h["scale"]),
        filter=str(pre_h["filter"]),
        roi=bool(pre_h["roi"]),
        equalize=bool(pre_h["equalize"]),
        clahe_tiles=tuple(pre_h["clahe_tiles"]),
        clahe_clip=float(pre_h["clahe_clip"]),
    )
    banks = None
    if ext_h["method"] == "lbp":
        extractor = LbpConfig(variant=ext_h["variant"], blocks=tuple(ext_h["blocks"]))
    elif ext_h["method"] == "convnet":
        extractor = ConvNetConfig(
            layers=tuple(ConvLayerConfig(**layer) for layer in ext_h["layers"])
        )
        banks = [ext_arrays[f"bank{i}"] for i in range(len(extractor.layers))]
    else:
        raise ValueError(f"corrupt model file: unknown extractor {ext_h['method']!r}")

    transform = TransformConfig(pca_fraction=float(tr_h["pca_fraction"]), whiten=bool(tr_h["whiten"]))
    params = SvmParams(
        C=float(cl_h["C"]),
        gamma=float(cl_h["gamma"]),
        tol=float(cl_h["tol"]),
        max_passes=int(cl_h["max_passes"]),
    )
    config = PipelineConfig(
        preprocess=preprocess,
        extractor=extractor,
        transform=transform,
        classifier=params,
        augmented=bool(aug_h["enabled"]),
        seed=int(pre_h["seed"]),
    )
    standardizer = Standardizer(means=tr_arrays["feature_means"], stds=tr_arrays["feature_stds"])
    pca = PcaModel(
        mean=tr_arrays["pca_mean"],
        components=tr_arrays["components"],
        component_variances=tr_arrays["component_variances"],
        whiten=bool(tr_h["whiten"]),
        epsilon=float(tr_h["epsilon"]),
    )
    classifier = SvmModel(
        support_vectors=cl_arrays["support_vectors"],
        dual_coefs=cl_arrays["dual_coefs"],
        bias=float(cl_h["bias"]),
        gamma=float(cl_h["gamma"]),
    )
    return TrainedPipeline(config, banks, standardizer, pca, classifier)


def model_digest(data: bytes) -> str:
    """Hex SHA-256 of a serialized model, for logging and comparison."""
    return hashlib.sha256(data).hexdigest()


def save_model(path: str | Path, pipeline: TrainedPipeline) -> str:
    """Write the model file; returns its hex digest."""
    data = model_bytes(pipeline)
    Path(path).write_bytes(data)
    return model_digest(data)


def load_model(path: str | Path) -> TrainedPipeline:
    return model_from_bytes(Path(path).read_bytes())
