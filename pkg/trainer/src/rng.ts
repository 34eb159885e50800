/** Deterministic PRNG so training runs are reproducible across machines.
 * splitmix64-style seeding feeding a mulberry32 core; never Math.random. */
export class Rng {
  private state: number;

  constructor(seed: number) {
    // scramble the seed so nearby seeds diverge immediately
    let h = seed >>> 0;
    h = Math.imul(h ^ (h >>> 16), 0x45d9f3b);
    h = Math.imul(h ^ (h >>> 16), 0x45d9f3b);
    this.state = (h ^ (h >>> 16)) >>> 0;
  }

  /** uniform in [0, 1) */
  next(): number {
    this.state = (this.state + 0x6d2b79f5) >>> 0;
    let t = this.state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  }

  /** integer in [0, n) */
  int(n: number): number {
    return Math.floor(this.next() * n);
  }

  /** standard normal via Box-Muller */
  normal(): number {
    let u = 0;
    while (u === 0) u = this.next();
    const v = this.next();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }

  shuffle<T>(items: T[]): void {
    for (let i = items.length - 1; i > 0; i--) {
      const j = this.int(i + 1);
      [items[i], items[j]] = [items[j], items[i]];
    }
  }

  /** derived generator, stable per label */
  child(label: number): Rng {
    return new Rng((this.state ^ Math.imul(label + 1, 0x9e3779b9)) >>> 0);
  }
}
