#!/usr/bin/env python3
"""Pack a folder of images into IDX files the CLI can read.

Layout: <root>/<class_name>/*.png|jpg|... ; classes are sorted by name and
numbered from 0. Images must share one size. Writes images.idx (0x803 for
--gray, else 0x804 with C=3) and labels.idx (0x801) into --out.

    python3 tools/convert_images.py photos/ --out data/photos
"""

import argparse
import pathlib
import struct
import sys

from PIL import Image

SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tif", ".tiff", ".webp"}


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("root", type=pathlib.Path)
    p.add_argument("--out", type=pathlib.Path, required=True)
    p.add_argument("--gray", action="store_true", help="convert to one luminance channel")
    args = p.parse_args()

    classes = sorted(d for d in args.root.iterdir() if d.is_dir())
    if not classes:
        sys.exit(f"no class folders under {args.root}")
    if len(classes) > 256:
        sys.exit("IDX labels hold at most 256 classes")

    pixels, labels, size = bytearray(), bytearray(), None
    for label, folder in enumerate(classes):
        for path in sorted(folder.iterdir()):
            if path.suffix.lower() not in SUFFIXES:
                continue
            with Image.open(path) as im:
                im = im.convert("L" if args.gray else "RGB")
                if size is None:
                    size = im.size
                elif im.size != size:
                    sys.exit(f"{path}: size {im.size} differs from {size}")
                if args.gray:
                    pixels += im.tobytes()
                else:
                    # HWC to CHW
                    for band in im.split():
                        pixels += band.tobytes()
            labels.append(label)
    if not labels:
        sys.exit("no images found")

    w, h = size
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "images.idx", "wb") as f:
        if args.gray:
            f.write(struct.pack(">IIII", 0x803, len(labels), h, w))
        else:
            f.write(struct.pack(">IIIII", 0x804, len(labels), 3, h, w))
        f.write(pixels)
    with open(args.out / "labels.idx", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels)
    print(f"{len(labels)} images, {len(classes)} classes, {h}x{w} -> {args.out}")


if __name__ == "__main__":
    main()
