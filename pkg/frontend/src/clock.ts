/** Playback clock: media time derived from wall time, rate and pauses.
 *
 * Speed changes rescale the clock only — schedules stay in media time, so
 * a 2x playback simply advances through the same schedule twice as fast.
 */

export class PlaybackClock {
  private mediaTime = 0;
  private rate = 1;
  private playing = false;
  private lastWall: number;

  constructor(private readonly nowS: () => number = () => performance.now() / 1000) {
    this.lastWall = this.nowS();
  }

  currentTime(): number {
    if (!this.playing) return this.mediaTime;
    return this.mediaTime + (this.nowS() - this.lastWall) * this.rate;
  }

  isPlaying(): boolean {
    return this.playing;
  }

  getRate(): number {
    return this.rate;
  }

  play(): void {
    if (this.playing) return;
    this.lastWall = this.nowS();
    this.playing = true;
  }

  pause(): void {
    this.mediaTime = this.currentTime();
    this.playing = false;
  }

  setRate(rate: number): void {
    if (!(rate > 0)) throw new Error(`rate must be > 0, got ${rate}`);
    this.mediaTime = this.currentTime();
    this.lastWall = this.nowS();
    this.rate = rate;
  }

  seek(timeS: number): void {
    this.mediaTime = Math.max(0, timeS);
    this.lastWall = this.nowS();
  }
}
