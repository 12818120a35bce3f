/** Binary STL export of exposed voxel faces (little-endian, closed mesh). */

import { Grid } from "./voxel.js";

type Corner = [number, number, number];

// Per (axis, side): four cell corners in CCW order seen from outside.
const FACES: Array<{ axis: 0 | 1 | 2; side: -1 | 1; corners: Corner[] }> = [
  { axis: 0, side: -1, corners: [[0, 0, 0], [0, 0, 1], [0, 1, 1], [0, 1, 0]] },
  { axis: 0, side: 1, corners: [[1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 0, 1]] },
  { axis: 1, side: -1, corners: [[0, 0, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1]] },
  { axis: 1, side: 1, corners: [[0, 1, 0], [0, 1, 1], [1, 1, 1], [1, 1, 0]] },
  { axis: 2, side: -1, corners: [[0, 0, 0], [0, 1, 0], [1, 1, 0], [1, 0, 0]] },
  { axis: 2, side: 1, corners: [[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]] },
];

export function gridToStl(grid: Grid): Buffer {
  const r = grid.resolution;
  const sp = grid.spacing;
  const origin = [grid.originX, grid.originY, grid.originZ];
  const tris: number[][] = [];

  const occupied = (x: number, y: number, z: number): boolean => {
    if (x < 0 || x >= r || y < 0 || y >= r || z < 0 || z >= r) return false;
    return grid.data[grid.index(x, y, z)] === 1;
  };

  for (let x = 0; x < r; x++) {
    for (let y = 0; y < r; y++) {
      for (let z = 0; z < r; z++) {
        if (!occupied(x, y, z)) continue;
        for (const face of FACES) {
          const n = [x, y, z];
          n[face.axis] += face.side;
          if (occupied(n[0], n[1], n[2])) continue;
          const quad = face.corners.map((c) => [
            origin[0] + (x + c[0]) * sp,
            origin[1] + (y + c[1]) * sp,
            origin[2] + (z + c[2]) * sp,
          ]);
          const normal = [0, 0, 0];
          normal[face.axis] = face.side;
          tris.push([...normal, ...quad[0], ...quad[1], ...quad[2]]);
          tris.push([...normal, ...quad[0], ...quad[2], ...quad[3]]);
        }
      }
    }
  }

  const buf = Buffer.alloc(84 + tris.length * 50);
  buf.write("cq-bridge voxel surface", 0, "ascii");
  buf.writeUInt32LE(tris.length, 80);
  let offset = 84;
  for (const tri of tris) {
    for (const value of tri) {
      buf.writeFloatLE(value, offset);
      offset += 4;
    }
    buf.writeUInt16LE(0, offset);
    offset += 2;
  }
  return buf;
}

export function stlTriangleCount(data: Buffer): number {
  return data.readUInt32LE(80);
}
