/** Cubic voxel occupancy grids with boolean ops and 6-connectivity labeling. */

export class Grid {
  readonly data: Uint8Array;

  constructor(
    readonly resolution: number,
    readonly originX: number,
    readonly originY: number,
    readonly originZ: number,
    readonly spacing: number,
    data?: Uint8Array,
  ) {
    const n = resolution ** 3;
    this.data = data ?? new Uint8Array(n);
    if (this.data.length !== n) throw new Error("occupancy size mismatch");
  }

  static cube(resolution: number, half: number): Grid {
    return new Grid(resolution, -half, -half, -half, (2 * half) / resolution);
  }

  index(x: number, y: number, z: number): number {
    return (x * this.resolution + y) * this.resolution + z;
  }

  center(axis: 0 | 1 | 2, i: number): number {
    const origin = axis === 0 ? this.originX : axis === 1 ? this.originY : this.originZ;
    return origin + (i + 0.5) * this.spacing;
  }

  clone(): Grid {
    return new Grid(
      this.resolution, this.originX, this.originY, this.originZ, this.spacing,
      this.data.slice(),
    );
  }

  blank(): Grid {
    return new Grid(this.resolution, this.originX, this.originY, this.originZ, this.spacing);
  }

  count(): number {
    let c = 0;
    for (let i = 0; i < this.data.length; i++) c += this.data[i];
    return c;
  }

  volume(): number {
    return this.count() * this.spacing ** 3;
  }

  union(other: Grid): Grid {
    const out = this.clone();
    for (let i = 0; i < out.data.length; i++) out.data[i] |= other.data[i];
    return out;
  }

  cut(other: Grid): Grid {
    const out = this.clone();
    for (let i = 0; i < out.data.length; i++) out.data[i] &= other.data[i] ^ 1;
    return out;
  }

  intersect(other: Grid): Grid {
    const out = this.clone();
    for (let i = 0; i < out.data.length; i++) out.data[i] &= other.data[i];
    return out;
  }

  /** Integer-voxel translation with clipping at the domain boundary. */
  shift(sx: number, sy: number, sz: number): Grid {
    const out = this.blank();
    const r = this.resolution;
    for (let x = 0; x < r; x++) {
      const fx = x - sx;
      if (fx < 0 || fx >= r) continue;
      for (let y = 0; y < r; y++) {
        const fy = y - sy;
        if (fy < 0 || fy >= r) continue;
        for (let z = 0; z < r; z++) {
          const fz = z - sz;
          if (fz < 0 || fz >= r) continue;
          out.data[this.index(x, y, z)] = this.data[this.index(fx, fy, fz)];
        }
      }
    }
    return out;
  }

  /** Axis-aligned bounds of set voxel cells: [minx,miny,minz,maxx,maxy,maxz]. */
  aabb(): number[] | null {
    const r = this.resolution;
    let lo = [r, r, r];
    let hi = [-1, -1, -1];
    for (let x = 0; x < r; x++) {
      for (let y = 0; y < r; y++) {
        for (let z = 0; z < r; z++) {
          if (!this.data[this.index(x, y, z)]) continue;
          const idx = [x, y, z];
          for (let a = 0; a < 3; a++) {
            if (idx[a] < lo[a]) lo[a] = idx[a];
            if (idx[a] > hi[a]) hi[a] = idx[a];
          }
        }
      }
    }
    if (hi[0] < 0) return null;
    const origins = [this.originX, this.originY, this.originZ];
    return [
      ...lo.map((v, a) => origins[a] + v * this.spacing),
      ...hi.map((v, a) => origins[a] + (v + 1) * this.spacing),
    ];
  }

  /** Number of 6-connected components (flood fill over an explicit stack). */
  componentCount(): number {
    const r = this.resolution;
    const visited = new Uint8Array(this.data.length);
    const stack = new Int32Array(this.data.length);
    let count = 0;
    for (let seed = 0; seed < this.data.length; seed++) {
      if (!this.data[seed] || visited[seed]) continue;
      count++;
      let top = 0;
      stack[top++] = seed;
      visited[seed] = 1;
      while (top > 0) {
        const code = stack[--top];
        const z = code % r;
        const y = ((code - z) / r) % r;
        const x = (code - z - y * r) / (r * r);
        const tryPush = (nx: number, ny: number, nz: number) => {
          if (nx < 0 || nx >= r || ny < 0 || ny >= r || nz < 0 || nz >= r) return;
          const ni = this.index(nx, ny, nz);
          if (this.data[ni] && !visited[ni]) {
            visited[ni] = 1;
            stack[top++] = ni;
          }
        };
        tryPush(x - 1, y, z); tryPush(x + 1, y, z);
        tryPush(x, y - 1, z); tryPush(x, y + 1, z);
        tryPush(x, y, z - 1); tryPush(x, y, z + 1);
      }
    }
    return count;
  }
}
