// Copyright 2026 The casimir-spectroscopy contributors
// SPDX-License-Identifier: Apache-2.0

import init, { spectrum, imaginaryAxis, pressureCurve } from "./pkg/casimir_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function material() {
  const osc = $("oscillators").value.trim().split(/\s+/).filter(Boolean).map(Number);
  return [num("plasma"), num("damping"), new Float64Array(osc)];
}

function columns(flat, width) {
  const cols = Array.from({ length: width }, () => []);
  for (let i = 0; i < flat.length; i += width) {
    for (let j = 0; j < width; j++) cols[j].push(flat[i + j]);
  }
  return cols;
}

const signedLog = (v) => Math.sign(v) * Math.log10(1 + Math.abs(v));

// x is always plotted on log10; ys are already in plot coordinates
function plot(canvas, x, series) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 48;
  ctx.clearRect(0, 0, width, height);
  const lx = x.map(Math.log10);
  const all = series.flatMap((s) => s.y).filter(Number.isFinite);
  const [x0, x1] = [Math.min(...lx), Math.max(...lx)];
  let [y0, y1] = [Math.min(...all), Math.max(...all)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const px = (v) => pad + ((v - x0) / (x1 - x0)) * (width - 2 * pad);
  const py = (v) => height - pad - ((v - y0) / (y1 - y0)) * (height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px system-ui";
  for (let k = Math.ceil(x0); k <= Math.floor(x1); k++) {
    ctx.fillText(`1e${k}`, px(k) - 10, height - pad + 14);
  }
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, height - pad);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.y.forEach((v, i) => (i ? ctx.lineTo(px(lx[i]), py(v)) : ctx.moveTo(px(lx[i]), py(v))));
    ctx.stroke();
  }
}

function guarded(fn) {
  return () => {
    $("error").textContent = "";
    try {
      fn();
    } catch (e) {
      $("error").textContent = String(e.message ?? e);
    }
  };
}

function drawSpectrum() {
  const [w, re, im] = columns(spectrum(...material(), num("w-min"), num("w-max"), 300), 3);
  plot($("spectrum"), w, [
    { y: re.map(signedLog), color: "#1565c0" },
    { y: im.map(signedLog), color: "#c62828" },
  ]);
}

function drawImag() {
  const [xi, eps] = columns(imaginaryAxis(...material(), num("xi-min"), num("xi-max"), 300), 2);
  plot($("imag"), xi, [{ y: eps.map((e) => Math.log10(e - 1)), color: "#2e7d32" }]);
}

function drawPressure() {
  const [d, p] = columns(
    pressureCurve(...material(), num("d-min"), num("d-max"), 40, num("temperature")),
    2,
  );
  plot($("pressure"), d, [{ y: p.map((v) => Math.log10(Math.abs(v))), color: "#6a1b9a" }]);
  $("pressure-note").textContent =
    `log10 |P| in Pa; P(${d[0].toExponential(2)} m) = ${p[0].toExponential(3)} Pa`;
}

await init();
$("run-spectrum").onclick = guarded(drawSpectrum);
$("run-imag").onclick = guarded(drawImag);
$("run-pressure").onclick = guarded(drawPressure);
guarded(drawSpectrum)();
guarded(drawImag)();
guarded(drawPressure)();
