"""Header-only metadata readers for images, WAVE audio and video containers.

Nothing here decodes pixel or sample data; every value comes from a fixed
header structure near the start of the file.
"""
from __future__ import annotations

import struct

from .errors import MissingChunk, TruncatedHeader, UnrecognizedFormat

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# samples per pixel for each PNG colour type
_PNG_CHANNELS = {0: 1, 2: 3, 3: 1, 4: 2, 6: 4}


def sniff_image(data: bytes):
    if data.startswith(PNG_SIGNATURE):
        return "PNG"
    if data[:6] in (b"GIF87a", b"GIF89a"):
        return "GIF"
    if data[:2] == b"BM":
        return "BMP"
    return None


def extract_image_attrs(data: bytes) -> dict:
    """Width, height, bits per pixel and format of a PNG, BMP or GIF."""
    kind = sniff_image(data)
    if kind is None:
        raise UnrecognizedFormat("not a PNG, BMP or GIF image")
    return {"PNG": _png, "GIF": _gif, "BMP": _bmp}[kind](data)


def _png(data):
    # signature, IHDR length + type, 13 bytes of IHDR data
    if len(data) < 33:
        raise TruncatedHeader(f"PNG header needs 33 bytes, got {len(data)}")
    length, ctype = struct.unpack(">I4s", data[8:16])
    if ctype != b"IHDR" or length < 13:
        raise UnrecognizedFormat("PNG does not start with an IHDR chunk")
    width, height, depth, colour = struct.unpack(">IIBB", data[16:26])
    channels = _PNG_CHANNELS.get(colour)
    if channels is None:
        raise UnrecognizedFormat(f"unknown PNG colour type {colour}")
    return {
        "width_px": width,
        "height_px": height,
        "bit_depth": depth * channels,
        "image_format": "PNG",
    }


def _gif(data):
    # signature + logical screen descriptor
    if len(data) < 13:
        raise TruncatedHeader(f"GIF header needs 13 bytes, got {len(data)}")
    width, height, packed = struct.unpack("<HHB", data[6:11])
    if packed & 0x80:
        bits = (packed & 0x07) + 1  # global colour table size
    else:
        bits = ((packed >> 4) & 0x07) + 1  # colour resolution
    return {"width_px": width, "height_px": height, "bit_depth": bits, "image_format": "GIF"}


def _bmp(data):
    if len(data) < 18:
        raise TruncatedHeader(f"BMP header needs at least 18 bytes, got {len(data)}")
    (dib_size,) = struct.unpack("<I", data[14:18])
    if dib_size == 12:  # BITMAPCOREHEADER
        if len(data) < 26:
            raise TruncatedHeader("BMP core header is truncated")
        width, height, _planes, bits = struct.unpack("<HHHH", data[18:26])
    elif dib_size >= 40:  # BITMAPINFOHEADER and its extensions
        if len(data) < 30:
            raise TruncatedHeader("BMP info header is truncated")
        width, height, _planes, bits = struct.unpack("<iiHH", data[18:30])
        height = abs(height)  # negative means top-down rows
    else:
        raise UnrecognizedFormat(f"unsupported BMP header size {dib_size}")
    return {"width_px": width, "height_px": height, "bit_depth": bits, "image_format": "BMP"}


def _riff_chunks(data, start):
    """Yield (chunk id, payload offset, payload length) of top-level RIFF chunks."""
    pos = start
    while pos + 8 <= len(data):
        cid, size = struct.unpack("<4sI", data[pos:pos + 8])
        body = pos + 8
        yield cid, body, min(size, len(data) - body)
        pos = body + size + (size & 1)


def extract_sound_attrs(data: bytes) -> dict:
    """Sample rate, channel count and duration of a RIFF/WAVE file.

    Duration is the data chunk length over the byte rate, rounded half up to
    whole milliseconds.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise UnrecognizedFormat("not a RIFF/WAVE file")
    fmt = None
    data_len = None
    for cid, off, size in _riff_chunks(data, 12):
        if cid == b"fmt " and fmt is None:
            if size < 16:
                raise TruncatedHeader("fmt chunk shorter than 16 bytes")
            fmt = struct.unpack("<HHIIHH", data[off:off + 16])
        elif cid == b"data" and data_len is None:
            data_len = size
    if fmt is None:
        raise MissingChunk("fmt")
    if data_len is None:
        raise MissingChunk("data")
    _tag, channels, rate, byte_rate, block_align, _bits = fmt
    if byte_rate == 0:
        byte_rate = rate * block_align
    if byte_rate == 0:
        raise UnrecognizedFormat("WAVE byte rate is zero")
    return {
        "sample_rate_hz": rate,
        "channels": channels,
        "duration_ms": (2 * data_len * 1000 + byte_rate) // (2 * byte_rate),
    }


def extract_video_attrs(data: bytes) -> dict:
    """Duration and frame size from an AVI main header or MP4 movie boxes."""
    if data[:4] == b"RIFF" and data[8:12] == b"AVI ":
        return _avi(data)
    if data[4:8] == b"ftyp":
        try:
            return _mp4(data)
        except (struct.error, IndexError):
            raise TruncatedHeader("MP4 movie header is truncated") from None
    raise UnrecognizedFormat("not an AVI or MP4 file")


def _avi(data):
    at = data.find(b"avih", 12)
    if at < 0:
        raise MissingChunk("avih")
    body = at + 8
    if len(data) < body + 40:
        raise TruncatedHeader("avih chunk is truncated")
    usec_per_frame, _, _, _, frames, _, _, _, width, height = struct.unpack(
        "<10I", data[body:body + 40])
    return {
        "duration_ms": (frames * usec_per_frame + 500) // 1000,
        "width_px": width,
        "height_px": height,
    }


_MP4_CONTAINERS = {b"moov", b"trak", b"mdia", b"minf", b"stbl", b"edts"}


def _boxes(data, start, end):
    pos = start
    while pos + 8 <= end:
        size, btype = struct.unpack(">I4s", data[pos:pos + 8])
        header = 8
        if size == 1:
            if pos + 16 > end:
                return
            (size,) = struct.unpack(">Q", data[pos + 8:pos + 16])
            header = 16
        elif size == 0:
            size = end - pos
        if size < header:
            return
        yield btype, pos + header, min(pos + size, end)
        pos += size


def _mp4(data):
    out = {}

    def walk(start, end):
        for btype, body, stop in _boxes(data, start, end):
            if btype in _MP4_CONTAINERS:
                walk(body, stop)
            elif btype == b"mvhd" and "duration_ms" not in out:
                version = data[body]
                if version == 1:
                    scale, duration = struct.unpack(">IQ", data[body + 20:body + 32])
                else:
                    scale, duration = struct.unpack(">II", data[body + 12:body + 20])
                if scale:
                    out["duration_ms"] = (duration * 1000 + scale // 2) // scale
            elif btype == b"tkhd" and "width_px" not in out:
                version = data[body]
                off = body + (88 if version == 1 else 76)
                if off + 8 <= stop:
                    w, h = struct.unpack(">II", data[off:off + 8])
                    if w and h:
                        out["width_px"], out["height_px"] = w >> 16, h >> 16

    walk(0, len(data))
    if not out:
        raise MissingChunk("moov")
    return out
