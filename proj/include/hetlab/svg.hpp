#pragma once

// Minimal deterministic SVG emission for the figures the CLI produces:
// framed axes with ticks, polylines, point markers, heat cells, and text
// annotations.  Pixel coordinates are rendered with two fixed decimals so a
// rerun with the same data writes identical bytes.

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetlab {

inline std::string svg_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// 0 -> deep blue, 1/2 -> near white, 1 -> deep red (diverging ramp)
inline std::string heat_color(double t) {
    t = std::fmin(1.0, std::fmax(0.0, t));
    const auto lerp = [](double a, double b, double u) { return a + (b - a) * u; };
    double r, g, b;
    if (t < 0.5) {
        const double u = t / 0.5;
        r = lerp(33, 247, u), g = lerp(102, 247, u), b = lerp(172, 247, u);
    } else {
        const double u = (t - 0.5) / 0.5;
        r = lerp(247, 178, u), g = lerp(247, 24, u), b = lerp(247, 43, u);
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(r + 0.5), int(g + 0.5), int(b + 0.5));
    return buf;
}

class SvgCanvas {
  public:
    SvgCanvas(int width, int height, double x0, double x1, double y0, double y1,
              std::string title = "")
        : w_(width), h_(height), x0_(x0), x1_(x1), y0_(y0), y1_(y1), title_(std::move(title)) {
        if (width < 100 || height < 100)
            throw std::invalid_argument("SvgCanvas: canvas smaller than 100px");
        if (!(x1_ > x0_)) x0_ -= 0.5, x1_ += 0.5;   // tolerate degenerate data ranges
        if (!(y1_ > y0_)) y0_ -= 0.5, y1_ += 0.5;
        if (!title_.empty())
            body_ += "<text x=\"" + fmt(w_ / 2.0) + "\" y=\"18\" text-anchor=\"middle\" " +
                     "font-family=\"monospace\" font-size=\"13\">" + svg_escape(title_) +
                     "</text>\n";
    }

    void frame_axes(const std::string& xlabel, const std::string& ylabel, int n_ticks = 5) {
        body_ += "<rect x=\"" + fmt(ml_) + "\" y=\"" + fmt(mt_) + "\" width=\"" +
                 fmt(w_ - ml_ - mr_) + "\" height=\"" + fmt(h_ - mt_ - mb_) +
                 "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
        for (int i = 0; i < n_ticks; ++i) {
            const double fx = x0_ + (x1_ - x0_) * i / (n_ticks - 1);
            const double fy = y0_ + (y1_ - y0_) * i / (n_ticks - 1);
            const double px = to_px(fx), py = to_py(fy);
            body_ += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(h_ - mb_) + "\" x2=\"" + fmt(px) +
                     "\" y2=\"" + fmt(h_ - mb_ + 4) + "\" stroke=\"#444444\"/>\n";
            body_ += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(h_ - mb_ + 16) +
                     "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">" +
                     num(fx) + "</text>\n";
            body_ += "<line x1=\"" + fmt(ml_ - 4) + "\" y1=\"" + fmt(py) + "\" x2=\"" + fmt(ml_) +
                     "\" y2=\"" + fmt(py) + "\" stroke=\"#444444\"/>\n";
            body_ += "<text x=\"" + fmt(ml_ - 6) + "\" y=\"" + fmt(py + 3) +
                     "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">" +
                     num(fy) + "</text>\n";
        }
        body_ += "<text x=\"" + fmt(ml_ + (w_ - ml_ - mr_) / 2.0) + "\" y=\"" + fmt(h_ - 6.0) +
                 "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">" +
                 svg_escape(xlabel) + "</text>\n";
        body_ += "<text x=\"14\" y=\"" + fmt(mt_ + (h_ - mt_ - mb_) / 2.0) +
                 "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\" " +
                 "transform=\"rotate(-90 14 " + fmt(mt_ + (h_ - mt_ - mb_) / 2.0) + ")\">" +
                 svg_escape(ylabel) + "</text>\n";
    }

    void polyline(const std::vector<std::array<double, 2>>& pts, const std::string& stroke,
                  double width_px = 1.0, bool closed = false) {
        if (pts.size() < 2) return;
        std::string d = "M " + fmt(to_px(pts[0][0])) + ' ' + fmt(to_py(pts[0][1]));
        for (std::size_t k = 1; k < pts.size(); ++k)
            d += " L " + fmt(to_px(pts[k][0])) + ' ' + fmt(to_py(pts[k][1]));
        if (closed) d += " Z";
        body_ += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
                 fmt(width_px) + "\"/>\n";
    }

    void marker(double x, double y, double r_px, const std::string& fill) {
        body_ += "<circle cx=\"" + fmt(to_px(x)) + "\" cy=\"" + fmt(to_py(y)) + "\" r=\"" +
                 fmt(r_px) + "\" fill=\"" + fill + "\"/>\n";
    }

    // axis-aligned filled cell in world coordinates (heatmaps)
    void cell(double cx0, double cx1, double cy0, double cy1, const std::string& fill) {
        const double px = to_px(cx0), py = to_py(cy1);
        body_ += "<rect x=\"" + fmt(px) + "\" y=\"" + fmt(py) + "\" width=\"" +
                 fmt(to_px(cx1) - px) + "\" height=\"" + fmt(to_py(cy0) - py) + "\" fill=\"" +
                 fill + "\"/>\n";
    }

    // annotation at fractional canvas position (0..1 across the full canvas)
    void annotate(double fx, double fy, const std::string& text, int px = 12,
                  const std::string& color = "#333333") {
        body_ += "<text x=\"" + fmt(fx * w_) + "\" y=\"" + fmt(fy * h_) +
                 "\" font-family=\"monospace\" font-size=\"" + std::to_string(px) +
                 "\" fill=\"" + color + "\">" + svg_escape(text) + "</text>\n";
    }

    std::string str() const {
        std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                          std::to_string(w_) + "\" height=\"" + std::to_string(h_) +
                          "\" viewBox=\"0 0 " + std::to_string(w_) + ' ' + std::to_string(h_) +
                          "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
        out += body_;
        out += "</svg>\n";
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("SvgCanvas: cannot open " + path);
        out << str();
        if (!out) throw std::runtime_error("SvgCanvas: write failed: " + path);
    }

  private:
    static std::string fmt(double px) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", px);
        return buf;
    }
    static std::string num(double v) {   // tick label
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return buf;
    }
    double to_px(double x) const { return ml_ + (x - x0_) / (x1_ - x0_) * (w_ - ml_ - mr_); }
    double to_py(double y) const {
        return h_ - mb_ - (y - y0_) / (y1_ - y0_) * (h_ - mt_ - mb_);
    }

    int w_, h_;
    double x0_, x1_, y0_, y1_;
    std::string title_;
    std::string body_;
    const double ml_ = 56, mr_ = 16, mt_ = 28, mb_ = 36;   // axis margins (px)
};

} // namespace hetlab
