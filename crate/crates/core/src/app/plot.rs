use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use base64::Engine as _;
use base64::engine::general_purpose::STANDARD;

use super::run::{CHAMPION_PNG, CONFIG_FILE, GA_LOG, QD_LOG, read_snapshot, snapshot_path};
use crate::drawgen::render;
use crate::error::{Error, IoContext, Result};
use crate::qd::RunConfig;
use crate::raster::Raster;

/// Generations shown in the snapshot montage when none are requested.
pub const DEFAULT_SNAPSHOTS: [u32; 3] = [1, 10, 50];

const THUMB: usize = 48;

/// Minimal SVG document builder.
struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    fn raw(&mut self, s: &str) {
        self.body.push_str(s);
        self.body.push('\n');
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="{size}" text-anchor="{anchor}" font-family="sans-serif">{}</text>"#,
            escape(s)
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.1}" y="{y:.1}" width="{w:.1}" height="{h:.1}" {style}/>"#
        );
    }

    fn png(&mut self, x: f64, y: f64, size: f64, img: &Raster) {
        let _ = writeln!(
            self.body,
            r#"<image x="{x:.1}" y="{y:.1}" width="{size:.1}" height="{size:.1}" href="data:image/png;base64,{}"/>"#,
            STANDARD.encode(img.to_png_bytes())
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One run's per-generation series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub fitness: Vec<f64>,
    pub diversity: Vec<f64>,
}

pub fn read_qd_log(run_dir: &Path) -> Result<Series> {
    let path = run_dir.join(QD_LOG);
    let text = std::fs::read_to_string(&path).at(&path)?;
    let mut s = Series {
        fitness: Vec::new(),
        diversity: Vec::new(),
    };
    for (n, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| {
            f.get(i)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::Format(format!("{}: line {}: bad field {i}", path.display(), n + 1)))
        };
        s.fitness.push(parse(1)?);
        s.diversity.push(parse(2)?);
    }
    Ok(s)
}

/// Per-generation mean and population standard deviation across series.
pub fn mean_std(series: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    let Some(len) = series.first().map(Vec::len) else {
        return Err(Error::validation("no series to aggregate"));
    };
    if let Some(bad) = series.iter().find(|s| s.len() != len) {
        return Err(Error::validation(format!(
            "mismatched run lengths: {len} and {} generations",
            bad.len()
        )));
    }
    let n = series.len() as f64;
    Ok((0..len)
        .map(|g| {
            let mean = series.iter().map(|s| s[g]).sum::<f64>() / n;
            let var = series.iter().map(|s| (s[g] - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        })
        .collect())
}

/// Mean +- std band plus mean line inside a plot box.
fn band_panel(svg: &mut Svg, origin: (f64, f64), size: (f64, f64), stats: &[(f64, f64)], title: &str, colour: &str) {
    let (x0, y0) = origin;
    let (w, h) = size;
    let hi = stats
        .iter()
        .map(|(m, s)| m + s)
        .fold(0.0_f64, f64::max)
        .max(1e-9)
        * 1.05;
    let last = (stats.len().max(2) - 1) as f64;
    let px = |g: usize| x0 + w * g as f64 / last;
    let py = |v: f64| y0 + h - h * (v / hi).clamp(0.0, 1.0);

    svg.rect(x0, y0, w, h, r##"fill="none" stroke="#444""##);
    svg.text(x0 + w / 2.0, y0 - 8.0, 14.0, "middle", title);
    svg.text(x0 - 6.0, y0 + 4.0, 10.0, "end", &format!("{hi:.3}"));
    svg.text(x0 - 6.0, y0 + h, 10.0, "end", "0");
    svg.text(x0, y0 + h + 14.0, 10.0, "middle", "1");
    svg.text(x0 + w, y0 + h + 14.0, 10.0, "middle", &stats.len().to_string());
    svg.text(x0 + w / 2.0, y0 + h + 28.0, 11.0, "middle", "generation");

    let mut band = String::new();
    for (g, (m, s)) in stats.iter().enumerate() {
        let _ = write!(band, "{:.2},{:.2} ", px(g), py(m + s));
    }
    for (g, (m, s)) in stats.iter().enumerate().rev() {
        let _ = write!(band, "{:.2},{:.2} ", px(g), py((m - s).max(0.0)));
    }
    svg.raw(&format!(
        r#"<polygon points="{}" fill="{colour}" fill-opacity="0.25" stroke="none"/>"#,
        band.trim_end()
    ));
    let line: Vec<String> = stats
        .iter()
        .enumerate()
        .map(|(g, (m, _))| format!("{:.2},{:.2}", px(g), py(*m)))
        .collect();
    svg.raw(&format!(
        r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
        line.join(" ")
    ));
}

/// Aggregate fitness and diversity bands over QD runs.
pub fn timeseries_svg(runs: &[Series]) -> Result<String> {
    let fit = mean_std(&runs.iter().map(|s| s.fitness.clone()).collect::<Vec<_>>())?;
    let div = mean_std(&runs.iter().map(|s| s.diversity.clone()).collect::<Vec<_>>())?;
    let mut svg = Svg::new(760.0, 340.0);
    svg.text(380.0, 20.0, 15.0, "middle", &format!("{} run(s), mean and standard deviation", runs.len()));
    band_panel(&mut svg, (60.0, 60.0), (300.0, 220.0), &fit, "mean elite fitness", "#1f5fbf");
    band_panel(&mut svg, (430.0, 60.0), (300.0, 220.0), &div, "diversity", "#d9731a");
    Ok(svg.finish())
}

fn thumbnail(img: &Raster) -> Result<Raster> {
    img.resample_area(THUMB, THUMB)
}

/// One panel per generation; each elite is drawn at its map position.
pub fn snapshot_svg(run_dir: &Path, generations: &[u32]) -> Result<String> {
    let cfg_path = run_dir.join(CONFIG_FILE);
    let config = RunConfig::parse(&std::fs::read_to_string(&cfg_path).at(&cfg_path)?)?;
    let panel = 420.0;
    let gap = 30.0;
    let mut svg = Svg::new(
        gap + generations.len() as f64 * (panel + gap),
        panel + 2.0 * gap + 20.0,
    );
    let mut cache: HashMap<[u64; 14], Raster> = HashMap::new();
    for (p, &g) in generations.iter().enumerate() {
        let snap = read_snapshot(&snapshot_path(run_dir, g))?;
        let x0 = gap + p as f64 * (panel + gap);
        let y0 = 2.0 * gap;
        svg.rect(x0, y0, panel, panel, r##"fill="none" stroke="#444""##);
        let populated = snap.niches.iter().filter(|n| n.elite.is_some()).count();
        svg.text(
            x0 + panel / 2.0,
            y0 - 10.0,
            14.0,
            "middle",
            &format!("generation {g}: {populated}/{} niches", snap.niches.len()),
        );
        let inner = panel - THUMB as f64;
        for n in &snap.niches {
            let (cx, cy) = (x0 + THUMB as f64 / 2.0 + inner * n.centroid[0], y0 + THUMB as f64 / 2.0 + inner * n.centroid[1]);
            svg.raw(&format!(r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="2" fill="#c33"/>"##));
            let Some(e) = &n.elite else { continue };
            let key = e.genome.genes().map(f64::to_bits);
            let thumb = match cache.get(&key) {
                Some(t) => t.clone(),
                None => {
                    let t = thumbnail(&render(&e.genome, config.canvas, config.render_seed)?)?;
                    cache.insert(key, t.clone());
                    t
                }
            };
            svg.png(x0 + inner * e.map_pos[0], y0 + inner * e.map_pos[1], THUMB as f64, &thumb);
        }
    }
    Ok(svg.finish())
}

/// Grid of GA champion images.
pub fn champion_svg(run_dirs: &[PathBuf]) -> Result<String> {
    let cols = (run_dirs.len() as f64).sqrt().ceil().max(1.0) as usize;
    let rows = run_dirs.len().div_ceil(cols);
    let cell = 140.0;
    let mut svg = Svg::new(cols as f64 * cell + 20.0, rows as f64 * (cell + 16.0) + 20.0);
    for (i, dir) in run_dirs.iter().enumerate() {
        let img = Raster::read_png(dir.join(CHAMPION_PNG))?.resample_area(128, 128)?;
        let x = 10.0 + (i % cols) as f64 * cell;
        let y = 10.0 + (i / cols) as f64 * (cell + 16.0);
        svg.png(x + 6.0, y, 128.0, &img);
        let name = dir.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        svg.text(x + cell / 2.0, y + 128.0 + 12.0, 10.0, "middle", &name);
    }
    Ok(svg.finish())
}

/// Run directories under `dirs`: each entry is used as-is when it holds a
/// log, otherwise its `seed_*` children are used in name order.
pub fn expand_run_dirs(dirs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for d in dirs {
        if d.join(QD_LOG).exists() || d.join(GA_LOG).exists() {
            out.push(d.clone());
            continue;
        }
        let mut children: Vec<PathBuf> = std::fs::read_dir(d)
            .at(d)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("seed_")))
            .filter(|p| p.join(QD_LOG).exists() || p.join(GA_LOG).exists())
            .collect();
        if children.is_empty() {
            return Err(Error::validation(format!("{} is not a run directory", d.display())));
        }
        children.sort();
        out.extend(children);
    }
    Ok(out)
}

/// Write `timeseries.svg` and `snapshots.svg` for QD runs and
/// `champions.svg` for GA runs. Snapshots come from the first QD run;
/// requested generations beyond its length are dropped.
pub fn cmd_plot(run_dirs: &[PathBuf], out_dir: &Path, generations: &[u32]) -> Result<Vec<PathBuf>> {
    let dirs = expand_run_dirs(run_dirs)?;
    let (qd, ga): (Vec<PathBuf>, Vec<PathBuf>) = dirs.into_iter().partition(|d| d.join(QD_LOG).exists());
    std::fs::create_dir_all(out_dir).at(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, svg: String| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, svg).at(&path)?;
        written.push(path);
        Ok(())
    };
    if !qd.is_empty() {
        let series = qd.iter().map(|d| read_qd_log(d)).collect::<Result<Vec<_>>>()?;
        emit("timeseries.svg", timeseries_svg(&series)?)?;
        let len = series[0].fitness.len() as u32;
        let gens: Vec<u32> = generations.iter().copied().filter(|&g| g >= 1 && g <= len).collect();
        if !gens.is_empty() {
            emit("snapshots.svg", snapshot_svg(&qd[0], &gens)?)?;
        }
    }
    if !ga.is_empty() {
        emit("champions.svg", champion_svg(&ga)?)?;
    }
    Ok(written)
}
