#!/usr/bin/env python3
# Copyright 2026 The CrowdForge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert an ETH/UCY obsmat.txt file into the canonical trajectory format.

obsmat rows are: frame ped_id pos_x pos_z pos_y v_x v_z v_y (meters).
Annotated frames are every 6th video frame at 15 fps, i.e. 0.4 s apart.
"""

import argparse
import sys


def convert(lines, frame_step, dt):
    rows = []
    for n, line in enumerate(lines, 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) < 5:
            raise ValueError(f"line {n}: expected at least 5 columns, got {len(parts)}")
        frame = int(round(float(parts[0])))
        pid = int(round(float(parts[1])))
        rows.append((pid, frame, float(parts[2]), float(parts[4])))
    if not rows:
        return []
    first = min(r[1] for r in rows)
    out = []
    for pid, frame, x, y in sorted(rows):
        offset = frame - first
        if offset % frame_step:
            raise ValueError(f"frame {frame} is not on the {frame_step}-frame grid")
        out.append(f"{pid} {offset // frame_step} {x:.6f} {y:.6f}")
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("obsmat")
    ap.add_argument("out")
    ap.add_argument("--frame-step", type=int, default=6)
    ap.add_argument("--dt", type=float, default=0.4)
    args = ap.parse_args(argv)
    with open(args.obsmat) as f:
        body = convert(f, args.frame_step, args.dt)
    with open(args.out, "w") as f:
        f.write(f"# dt={args.dt:g}\n")
        f.write("# converted from " + args.obsmat.replace("\n", " ") + "\n")
        for line in body:
            f.write(line + "\n")
    print(f"wrote {len(body)} samples", file=sys.stderr)


if __name__ == "__main__":
    main()
