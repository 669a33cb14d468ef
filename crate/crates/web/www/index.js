import init, { ambiguityCut, boundCurve, matchedFilterCut } from './pkg/ranging_web.js';

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function draw(canvas, x, series, { logY = false, xLabel = '' } = {}) {
  const ctx = canvas.getContext('2d');
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const ys = series.flatMap((s) => Array.from(s.y)).filter(Number.isFinite);
  const f = logY ? Math.log10 : (v) => v;
  let lo = Math.min(...ys.map(f)), hi = Math.max(...ys.map(f));
  if (!logY) lo = Math.min(lo, 0);
  if (hi === lo) hi = lo + 1;
  const x0 = x[0], x1 = x[x.length - 1];
  const px = (v) => pad + ((v - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (v) => h - pad - ((f(v) - lo) / (hi - lo)) * (h - 2 * pad);

  ctx.strokeStyle = '#999';
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = '#444';
  ctx.font = '11px sans-serif';
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 24, h - pad + 14);
  ctx.fillText(xLabel, w / 2 - 20, h - 8);
  const fmt = (v) => (logY ? (10 ** v).toExponential(1) : v.toPrecision(2));
  ctx.fillText(fmt(hi), 2, pad + 4);
  ctx.fillText(fmt(lo), 2, h - pad);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.y.forEach((v, i) => (i ? ctx.lineTo(px(x[i]), py(v)) : ctx.moveTo(px(x[i]), py(v))));
    ctx.stroke();
  }
}

function guarded(fn) {
  return () => {
    try {
      fn();
      $('status').textContent = '';
      $('status').className = '';
    } catch (e) {
      $('status').textContent = String(e.message || e);
      $('status').className = 'err';
    }
  };
}

const renderMf = guarded(() => {
  const c = matchedFilterCut(num('mf-df') * 1e6, num('mf-n'), num('mf-t'));
  draw($('mf'), c.x, [{ y: c.y2, color: '#d62728' }, { y: c.y, color: '#1f77b4' }], { xLabel: 'delay (us)' });
});

const renderAf = guarded(() => {
  const c = ambiguityCut(num('af-df') * 1e6, num('af-n'), num('af-t'), num('af-fd') * 1e3, 1601);
  draw($('af'), c.x, [{ y: c.y, color: '#1f77b4' }], { xLabel: 'delay (us)' });
});

const renderCr = guarded(() => {
  const c = boundCurve(num('cr-bw') * 1e6, num('cr-snr'), num('cr-t'), 32);
  draw($('cr'), c.x, [{ y: c.y, color: '#1f77b4' }, { y: c.y2, color: '#d62728' }], {
    logY: true,
    xLabel: 'pulses N (range std, m)',
  });
});

await init();
for (const [ids, render] of [
  [['mf-df', 'mf-n', 'mf-t'], renderMf],
  [['af-df', 'af-n', 'af-t', 'af-fd'], renderAf],
  [['cr-bw', 'cr-snr', 'cr-t'], renderCr],
]) {
  ids.forEach((id) => $(id).addEventListener('input', render));
  render();
}
