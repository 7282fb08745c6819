/** Keyframe playback: tween matching elements, fade the rest.
 *
 * The server renders every chart state with stable element ids, so two
 * adjacent keyframes can be diffed by id.  Elements present in both
 * frames get their numeric attributes interpolated; elements that
 * appear or disappear fade in or out.  The chart shown after a
 * transition is always the server's SVG verbatim, never a locally
 * edited document.
 */

const TWEEN_ATTRS = [
  "x",
  "y",
  "width",
  "height",
  "cx",
  "cy",
  "r",
  "x1",
  "y1",
  "x2",
  "y2",
  "opacity",
  "stroke-width",
  "font-size",
] as const;

export interface AttrTween {
  id: string;
  attr: string;
  from: number;
  to: number;
}

export interface FadeOut {
  id: string;
  fromOpacity: number;
}

export interface FrameDiff {
  tweens: AttrTween[];
  fadeOuts: FadeOut[];
  /** ids only in the target frame; the player fades clones of these in */
  fadeIns: string[];
  /** ids whose shape data changed (path/text); swapped halfway through */
  swaps: string[];
}

export function parseSvg(text: string): SVGSVGElement {
  const doc = new DOMParser().parseFromString(text, "image/svg+xml");
  const root = doc.documentElement;
  if (root.nodeName !== "svg") {
    throw new Error("not an SVG document");
  }
  return root as unknown as SVGSVGElement;
}

export function collectById(root: Element): Map<string, Element> {
  const out = new Map<string, Element>();
  for (const el of root.querySelectorAll("[id]")) {
    out.set(el.id, el);
  }
  return out;
}

function numericAttr(el: Element, name: string): number | null {
  const raw = el.getAttribute(name);
  if (raw === null) return null;
  const value = Number(raw);
  return Number.isFinite(value) ? value : null;
}

function currentOpacity(el: Element): number {
  return numericAttr(el, "opacity") ?? 1;
}

/** Shape payloads that cannot be tweened attribute by attribute. */
function shapeChanged(from: Element, to: Element): boolean {
  for (const attr of ["d", "points"]) {
    if ((from.getAttribute(attr) ?? "") !== (to.getAttribute(attr) ?? "")) {
      return true;
    }
  }
  return from.textContent !== to.textContent;
}

export function diffFrames(fromRoot: Element, toRoot: Element): FrameDiff {
  const fromById = collectById(fromRoot);
  const toById = collectById(toRoot);
  const diff: FrameDiff = { tweens: [], fadeOuts: [], fadeIns: [], swaps: [] };

  for (const [id, fromEl] of fromById) {
    const toEl = toById.get(id);
    if (toEl === undefined) {
      diff.fadeOuts.push({ id, fromOpacity: currentOpacity(fromEl) });
      continue;
    }
    if (shapeChanged(fromEl, toEl)) {
      diff.swaps.push(id);
      continue;
    }
    for (const attr of TWEEN_ATTRS) {
      const from = numericAttr(fromEl, attr);
      const to = numericAttr(toEl, attr);
      if (from !== null && to !== null && from !== to) {
        diff.tweens.push({ id, attr, from, to });
      } else if (attr === "opacity" && from === null && to !== null && to !== 1) {
        diff.tweens.push({ id, attr, from: 1, to });
      } else if (attr === "opacity" && to === null && from !== null && from !== 1) {
        diff.tweens.push({ id, attr, from, to: 1 });
      }
    }
  }
  for (const id of toById.keys()) {
    if (!fromById.has(id)) {
      diff.fadeIns.push(id);
    }
  }
  return diff;
}

function fmt(value: number): string {
  return String(Math.round(value * 1000) / 1000);
}

/**
 * Write one moment of a transition onto the live elements.
 * t runs 0..1; the map indexes the LIVE (from-frame) elements plus any
 * fade-in clones the player has inserted.
 */
export function applyProgress(
  live: Map<string, Element>,
  diff: FrameDiff,
  t: number,
): void {
  for (const tween of diff.tweens) {
    const el = live.get(tween.id);
    if (el) {
      el.setAttribute(tween.attr, fmt(tween.from + (tween.to - tween.from) * t));
    }
  }
  for (const fade of diff.fadeOuts) {
    const el = live.get(fade.id);
    if (el) {
      el.setAttribute("opacity", fmt(fade.fromOpacity * (1 - t)));
    }
  }
  for (const id of diff.fadeIns) {
    const el = live.get(id);
    if (el) {
      const target = numericAttr(el, "data-target-opacity") ?? 1;
      el.setAttribute("opacity", fmt(target * t));
    }
  }
}

export interface PlayerOptions {
  /** transition length per keyframe in ms; 0 swaps frames instantly */
  stepMs?: number;
  /** tick interval in ms */
  tickMs?: number;
  sleep?: (ms: number) => Promise<void>;
  /** called after each keyframe has fully landed */
  onFrame?: (index: number) => void;
}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

export class FramePlayer {
  private readonly stepMs: number;
  private readonly tickMs: number;
  private readonly sleep: (ms: number) => Promise<void>;
  private readonly onFrame: (index: number) => void;
  private playing = false;

  constructor(
    private readonly container: HTMLElement,
    options: PlayerOptions = {},
  ) {
    this.stepMs = options.stepMs ?? 400;
    this.tickMs = options.tickMs ?? 16;
    this.sleep = options.sleep ?? defaultSleep;
    this.onFrame = options.onFrame ?? (() => {});
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  /** Replace the chart immediately, no transition. */
  show(svg: string): void {
    this.container.replaceChildren(
      this.container.ownerDocument.importNode(parseSvg(svg), true),
    );
  }

  private currentRoot(): Element | null {
    return this.container.querySelector("svg");
  }

  /** Play keyframes in order, tweening from whatever is on screen. */
  async play(svgs: string[], startIndex = 0): Promise<void> {
    if (this.playing) {
      throw new Error("player is busy");
    }
    this.playing = true;
    try {
      for (let i = 0; i < svgs.length; i++) {
        await this.transitionTo(svgs[i]);
        this.onFrame(startIndex + i);
      }
    } finally {
      this.playing = false;
    }
  }

  private async transitionTo(svg: string): Promise<void> {
    const from = this.currentRoot();
    if (from === null || this.stepMs <= 0) {
      this.show(svg);
      return;
    }
    const target = parseSvg(svg);
    const diff = diffFrames(from, target);
    const live = collectById(from);

    // Clones of appearing elements join the live document at opacity 0.
    const targetById = collectById(target);
    for (const id of diff.fadeIns) {
      const source = targetById.get(id);
      if (!source) continue;
      const clone = from.ownerDocument.importNode(source, true) as Element;
      clone.setAttribute(
        "data-target-opacity",
        source.getAttribute("opacity") ?? "1",
      );
      clone.setAttribute("opacity", "0");
      from.appendChild(clone);
      live.set(id, clone);
    }

    const ticks = Math.max(1, Math.round(this.stepMs / this.tickMs));
    for (let tick = 1; tick <= ticks; tick++) {
      const t = tick / ticks;
      applyProgress(live, diff, t);
      if (t >= 0.5) {
        for (const id of diff.swaps.splice(0)) {
          const source = targetById.get(id);
          const el = live.get(id);
          if (source && el) {
            el.replaceWith(from.ownerDocument.importNode(source, true));
          }
        }
      }
      await this.sleep(this.tickMs);
    }
    // Land exactly on the server's frame.
    this.show(svg);
  }
}
