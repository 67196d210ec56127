// Offline SVG map pane: pan/zoom viewport over a local-metre projection,
// polygon drawing, vertex dragging, depot placement.

import { toGeo, toLocal } from "./geo.js";
import type { Session } from "./state.js";
import type { GeoPt } from "./types.js";

export type Tool = "pan" | "draw" | "depot";

const SVG_NS = "http://www.w3.org/2000/svg";

export class MapPane {
  readonly svg: SVGSVGElement;
  tool: Tool = "pan";
  center: GeoPt;
  scale = 0.8; // pixels per metre
  private drawing: GeoPt[] = [];
  private drag: { regionId: string; index: number } | null = null;
  private panFrom: { x: number; y: number } | null = null;
  private overlay: SVGGElement;
  private planLayer: SVGGElement;
  private draftLayer: SVGGElement;
  private grid: SVGGElement;

  constructor(
    private session: Session,
    container: HTMLElement,
    center: GeoPt = { lat: 40.0, lon: 23.0 },
  ) {
    this.center = center;
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("class", "map");
    this.grid = this.layer("grid");
    this.planLayer = this.layer("plan");
    this.draftLayer = this.layer("draft");
    this.overlay = this.layer("overlay");
    container.appendChild(this.svg);
    this.bindEvents();
    session.onChange(() => this.renderDraft());
    this.renderGrid();
    this.renderDraft();
  }

  private layer(name: string): SVGGElement {
    const g = document.createElementNS(SVG_NS, "g");
    g.setAttribute("data-layer", name);
    this.svg.appendChild(g);
    return g;
  }

  // -- projection -------------------------------------------------------------

  private view(): { w: number; h: number } {
    const r = this.svg.getBoundingClientRect();
    return { w: r.width || 900, h: r.height || 600 };
  }

  toScreen(p: GeoPt): { x: number; y: number } {
    const { w, h } = this.view();
    const local = toLocal(this.center, p);
    return { x: w / 2 + local.x * this.scale, y: h / 2 - local.y * this.scale };
  }

  toGeoPoint(px: number, py: number): GeoPt {
    const { w, h } = this.view();
    return toGeo(this.center, (px - w / 2) / this.scale, (h / 2 - py) / this.scale);
  }

  // -- interactions -----------------------------------------------------------

  private bindEvents(): void {
    this.svg.addEventListener("pointerdown", (e) => this.onDown(e));
    this.svg.addEventListener("pointermove", (e) => this.onMove(e));
    this.svg.addEventListener("pointerup", (e) => this.onUp(e));
    this.svg.addEventListener("dblclick", (e) => {
      e.preventDefault();
      this.finishDrawing();
    });
    this.svg.addEventListener("wheel", (e) => {
      e.preventDefault();
      const factor = e.deltaY < 0 ? 1.2 : 1 / 1.2;
      this.scale = Math.min(20, Math.max(0.02, this.scale * factor));
      this.renderAll();
    });
    window.addEventListener("keydown", (e) => {
      if (e.key === "Enter") this.finishDrawing();
      if (e.key === "Escape") {
        this.drawing = [];
        this.renderDraft();
      }
    });
  }

  private local(e: PointerEvent): { x: number; y: number } {
    const r = this.svg.getBoundingClientRect();
    return { x: e.clientX - r.left, y: e.clientY - r.top };
  }

  private onDown(e: PointerEvent): void {
    const pos = this.local(e);
    const target = e.target as Element;
    const vertexOf = target.getAttribute?.("data-vertex");
    if (vertexOf) {
      const [regionId, idx] = vertexOf.split(":");
      this.drag = { regionId, index: Number(idx) };
      this.svg.setPointerCapture(e.pointerId);
      return;
    }
    if (this.tool === "draw") {
      this.drawing.push(this.toGeoPoint(pos.x, pos.y));
      this.renderDraft();
      return;
    }
    if (this.tool === "depot") {
      this.session.setDepot(this.toGeoPoint(pos.x, pos.y));
      this.tool = "pan";
      this.svg.dispatchEvent(new CustomEvent("tool-changed", { detail: this.tool }));
      return;
    }
    this.panFrom = pos;
    this.svg.setPointerCapture(e.pointerId);
  }

  private onMove(e: PointerEvent): void {
    const pos = this.local(e);
    if (this.drag) {
      this.session.moveVertex(this.drag.regionId, this.drag.index, this.toGeoPoint(pos.x, pos.y));
      return;
    }
    if (this.panFrom) {
      const dx = (pos.x - this.panFrom.x) / this.scale;
      const dy = (pos.y - this.panFrom.y) / this.scale;
      this.center = toGeo(this.center, -dx, dy);
      this.panFrom = pos;
      this.renderAll();
    }
  }

  private onUp(_e: PointerEvent): void {
    this.drag = null;
    this.panFrom = null;
  }

  finishDrawing(): void {
    if (this.drawing.length >= 3) {
      this.session.addRegion(this.drawing);
    }
    this.drawing = [];
    this.renderDraft();
  }

  // -- rendering ----------------------------------------------------------------

  renderAll(): void {
    this.renderGrid();
    this.renderDraft();
    this.svg.dispatchEvent(new CustomEvent("view-changed"));
  }

  private renderGrid(): void {
    this.grid.innerHTML = "";
    const { w, h } = this.view();
    const spacing = 100 * this.scale; // 100 m graticule
    if (spacing < 12) return;
    for (let x = (w / 2) % spacing; x < w; x += spacing) {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(x));
      line.setAttribute("x2", String(x));
      line.setAttribute("y1", "0");
      line.setAttribute("y2", String(h));
      line.setAttribute("class", "gridline");
      this.grid.appendChild(line);
    }
    for (let y = (h / 2) % spacing; y < h; y += spacing) {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("y1", String(y));
      line.setAttribute("y2", String(y));
      line.setAttribute("x1", "0");
      line.setAttribute("x2", String(w));
      line.setAttribute("class", "gridline");
      this.grid.appendChild(line);
    }
  }

  private polygonPath(ring: GeoPt[], close = true): string {
    const pts = ring.map((p) => {
      const s = this.toScreen(p);
      return `${s.x.toFixed(1)},${s.y.toFixed(1)}`;
    });
    return `M${pts.join(" L")}${close ? " Z" : ""}`;
  }

  renderDraft(): void {
    this.draftLayer.innerHTML = "";
    for (const region of this.session.regions) {
      const path = document.createElementNS(SVG_NS, "path");
      path.setAttribute("d", this.polygonPath(region.ring));
      path.setAttribute("class", region.selfIntersecting ? "region invalid" : "region");
      path.setAttribute("data-region", region.id);
      this.draftLayer.appendChild(path);
      region.ring.forEach((p, i) => {
        const s = this.toScreen(p);
        const c = document.createElementNS(SVG_NS, "circle");
        c.setAttribute("cx", String(s.x));
        c.setAttribute("cy", String(s.y));
        c.setAttribute("r", "4");
        c.setAttribute("class", "vertex");
        c.setAttribute("data-vertex", `${region.id}:${i}`);
        this.draftLayer.appendChild(c);
      });
    }
    if (this.drawing.length) {
      const path = document.createElementNS(SVG_NS, "path");
      path.setAttribute("d", this.polygonPath(this.drawing, false));
      path.setAttribute("class", "region drawing");
      this.draftLayer.appendChild(path);
    }
    if (this.session.depot) {
      const s = this.toScreen(this.session.depot);
      const pin = document.createElementNS(SVG_NS, "circle");
      pin.setAttribute("cx", String(s.x));
      pin.setAttribute("cy", String(s.y));
      pin.setAttribute("r", "6");
      pin.setAttribute("class", "depot");
      this.draftLayer.appendChild(pin);
    }
  }

  get planGroup(): SVGGElement {
    return this.planLayer;
  }

  get overlayGroup(): SVGGElement {
    return this.overlay;
  }
}
