"""Lane layout: collision-free scheduling of scrolling and pinned danmaku."""

from __future__ import annotations

from dataclasses import dataclass
import json

from .track import DanmakuTrack, DanmakuType, Position

DELAY_STEP_S = 0.25
MAX_DELAY_S = 5.0


@dataclass(frozen=True)
class ScreenConfig:
    width_px: int = 1280
    lane_count: int = 12
    lane_height_px: int = 32
    scroll_duration_s: float = 8.0
    pinned_duration_s: float = 4.0
    font_size_px: int = 25
    pinned_slot_count: int = 3

    def text_width_px(self, text: str) -> float:
        """Estimated pixel width: ASCII at 0.6 em, wide characters at 1 em."""
        width = 0.0
        for ch in text:
            width += 0.6 * self.font_size_px if ord(ch) < 128 else self.font_size_px
        return width


@dataclass(frozen=True)
class LaneAssignment:
    danmaku_id: str
    lane: int
    enter_s: float
    exit_s: float
    width_px: float
    speed_px_s: float  # 0 for pinned
    pinned: str | None = None  # "top" | "bottom" | None


def scroll_speed(width_px: float, screen: ScreenConfig) -> float:
    return (screen.width_px + width_px) / screen.scroll_duration_s


def collides(a: LaneAssignment, b: LaneAssignment, screen: ScreenConfig) -> bool:
    """Closed-form scroll-collision test, a entering no later than b.

    No collision requires a's tail to have cleared the right edge when b
    enters, and b never catching a before a leaves the left edge.
    """
    if b.enter_s < a.enter_s:
        a, b = b, a
    big_w = screen.width_px
    d = screen.scroll_duration_s
    dt = b.enter_s - a.enter_s
    tail_clear = a.speed_px_s * dt >= a.width_px
    no_overtake = b.speed_px_s * (a.enter_s + d - b.enter_s) <= big_w
    return not (tail_clear and no_overtake)


def layout(track: DanmakuTrack, screen: ScreenConfig = ScreenConfig(),
           ) -> list[LaneAssignment]:
    """Greedy first-fit lane assignment in time order; deterministic.

    Items that cannot be placed within the 5 s delay budget are dropped
    from the layout (they stay in the track).
    """
    assignments: list[LaneAssignment] = []
    lanes: list[list[LaneAssignment]] = [[] for _ in range(screen.lane_count)]
    top_slots: list[float] = [-1e18] * screen.pinned_slot_count
    bottom_slots: list[float] = [-1e18] * screen.pinned_slot_count

    steps = int(MAX_DELAY_S / DELAY_STEP_S)
    for d in track.danmaku:
        width = screen.text_width_px(d.text)
        if d.position in (Position.TOP, Position.BOTTOM):
            slots = top_slots if d.position is Position.TOP else bottom_slots
            placed = False
            for step in range(steps + 1):
                enter = d.time_s + step * DELAY_STEP_S
                for slot, busy_until in enumerate(slots):
                    if busy_until <= enter:
                        slots[slot] = enter + screen.pinned_duration_s
                        assignments.append(LaneAssignment(
                            danmaku_id=d.id, lane=slot, enter_s=enter,
                            exit_s=enter + screen.pinned_duration_s,
                            width_px=width, speed_px_s=0.0,
                            pinned=d.position.value))
                        placed = True
                        break
                if placed:
                    break
            continue

        speed = scroll_speed(width, screen)
        # occupants gone before this item's earliest entry can never collide
        horizon = d.time_s - screen.scroll_duration_s
        for lane in range(screen.lane_count):
            lanes[lane] = [p for p in lanes[lane] if p.enter_s > horizon]
        placed = False
        for step in range(steps + 1):
            enter = d.time_s + step * DELAY_STEP_S
            cand = LaneAssignment(
                danmaku_id=d.id, lane=0, enter_s=enter,
                exit_s=enter + screen.scroll_duration_s,
                width_px=width, speed_px_s=speed)
            for lane in range(screen.lane_count):
                # delay steps make enter times non-monotonic, so every
                # occupant still within a scroll window must be checked
                occupants = (p for p in lanes[lane]
                             if abs(p.enter_s - enter) < screen.scroll_duration_s)
                if all(not collides(p, cand, screen) for p in occupants):
                    final = LaneAssignment(
                        danmaku_id=d.id, lane=lane, enter_s=enter,
                        exit_s=enter + screen.scroll_duration_s,
                        width_px=width, speed_px_s=speed)
                    lanes[lane].append(final)
                    assignments.append(final)
                    placed = True
                    break
            if placed:
                break
    return assignments


def schedule_to_json(assignments: list[LaneAssignment]) -> str:
    data = [
        {
            "danmaku_id": a.danmaku_id,
            "lane": a.lane,
            "enter_s": a.enter_s,
            "exit_s": a.exit_s,
            "width_px": a.width_px,
            "speed_px_s": a.speed_px_s,
            "pinned": a.pinned,
        }
        for a in assignments
    ]
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def simulate_overlaps(assignments: list[LaneAssignment], screen: ScreenConfig,
                      tick_s: float = 0.01) -> list[tuple[str, str]]:
    """Brute-force dense-time overlap scan; the layout soundness oracle.

    Returns pairs of danmaku ids whose rectangles overlap in the same lane
    at any sampled tick.
    """
    by_lane: dict[tuple[str | None, int], list[LaneAssignment]] = {}
    for a in assignments:
        by_lane.setdefault((a.pinned, a.lane), []).append(a)
    bad: list[tuple[str, str]] = []
    for group in by_lane.values():
        group.sort(key=lambda a: a.enter_s)
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if b.enter_s >= a.exit_s:
                    break
                if _pair_overlaps(a, b, screen, tick_s):
                    bad.append((a.danmaku_id, b.danmaku_id))
    return bad


def _pair_overlaps(a: LaneAssignment, b: LaneAssignment, screen: ScreenConfig,
                   tick_s: float) -> bool:
    if a.pinned or b.pinned:
        # pinned slots: any dwell intersection is an overlap
        return b.enter_s < a.exit_s and a.enter_s < b.exit_s
    start = max(a.enter_s, b.enter_s)
    end = min(a.exit_s, b.exit_s)
    n = int((end - start) / tick_s) + 1
    for k in range(n):
        t = start + k * tick_s
        if t > end:
            break
        ax = screen.width_px - a.speed_px_s * (t - a.enter_s)
        bx = screen.width_px - b.speed_px_s * (t - b.enter_s)
        if ax < bx + b.width_px and bx < ax + a.width_px:
            return True
    return False
