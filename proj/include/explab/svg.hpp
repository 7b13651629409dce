#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "explab/dimension.hpp"
#include "explab/errors.hpp"
#include "explab/geometry.hpp"
#include "explab/point_cloud.hpp"
#include "explab/systems/irregular_saddle.hpp"

namespace explab::svg {

struct Style {
    double width = 640;
    double height = 640;
    double margin = 56;
    std::string title;
    std::string resolution_note;  // e.g. "grid 1/512"
};

/// Accumulates layers over one data window and emits a standalone SVG.  Elements are written
/// in insertion order, so output is deterministic.
class Figure {
public:
    explicit Figure(Style style) : s_(std::move(style)) {}

    /// Fixes the data window; when never called, it is fitted to the layers (unit square if empty).
    void set_window(double x0, double x1, double y0, double y1) {
        x0_ = x0; x1_ = x1; y0_ = y0; y1_ = y1;
        fixed_ = true;
    }

    void points(const std::vector<Point>& pts, const std::string& color, const std::string& label, double radius = 1.2) {
        require_2d(pts);
        Layer l{label, color, {}};
        for (const auto& p : pts) l.items.push_back(Item{Item::dot, p.c[0], p.c[1], radius, 0});
        fit(pts);
        layers_.push_back(std::move(l));
    }

    void polyline(const std::vector<Point>& pts, const std::string& color, const std::string& label) {
        require_2d(pts);
        Layer l{label, color, {}};
        for (std::size_t i = 1; i < pts.size(); ++i)
            l.items.push_back(Item{Item::line, pts[i - 1].c[0], pts[i - 1].c[1], pts[i].c[0], pts[i].c[1]});
        fit(pts);
        layers_.push_back(std::move(l));
    }

    void boxes(const Cover& cv, const std::string& color, const std::string& label) {
        if (cv.dim != 2) throw unsupported_error("svg: only 2D covers can be drawn; project to a coordinate plane first");
        Layer l{label, color, {}};
        std::vector<Point> corners;
        for (const auto& b : cv.boxes) {
            l.items.push_back(Item{Item::rect, b.lo(0), b.lo(1), b.hi(0), b.hi(1)});
            corners.push_back(Point::plane(b.lo(0), b.lo(1)));
            corners.push_back(Point::plane(b.hi(0), b.hi(1)));
        }
        fit(corners);
        layers_.push_back(std::move(l));
    }

    void segments(const std::vector<Segment>& segs, const std::string& color, const std::string& label) {
        Layer l{label, color, {}};
        std::vector<Point> ends;
        for (const auto& s : segs) {
            auto a = s.lo(), b = s.hi();
            l.items.push_back(Item{Item::line, a.c[0], a.c[1], b.c[0], b.c[1]});
            ends.push_back(a);
            ends.push_back(b);
        }
        fit(ends);
        layers_.push_back(std::move(l));
    }

    std::string str() const {
        double x0 = x0_, x1 = x1_, y0 = y0_, y1 = y1_;
        if (!fixed_ && !have_data_) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
        if (x1 - x0 <= 0) { x0 -= 0.5; x1 += 0.5; }
        if (y1 - y0 <= 0) { y0 -= 0.5; y1 += 0.5; }
        const double W = s_.width, H = s_.height, m = s_.margin;
        const double pw = W - 2 * m, ph = H - 2 * m;
        auto X = [&](double x) { return m + (x - x0) / (x1 - x0) * pw; };
        auto Y = [&](double y) { return H - m - (y - y0) / (y1 - y0) * ph; };

        std::string o;
        o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
             "\" viewBox=\"0 0 " + num(W) + " " + num(H) + "\">\n";
        o += "<rect x=\"0\" y=\"0\" width=\"" + num(W) + "\" height=\"" + num(H) + "\" fill=\"white\"/>\n";
        if (!s_.title.empty())
            o += "<text x=\"" + num(W / 2) + "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
                 escape(s_.title) + "</text>\n";
        // axes with five ticks each
        o += "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
        o += "<rect x=\"" + num(m) + "\" y=\"" + num(m) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) + "\"/>\n";
        o += "</g>\n<g id=\"ticks\" font-family=\"sans-serif\" font-size=\"10\">\n";
        for (int i = 0; i <= 4; ++i) {
            double tx = x0 + (x1 - x0) * i / 4, ty = y0 + (y1 - y0) * i / 4;
            o += "<line x1=\"" + num(X(tx)) + "\" y1=\"" + num(H - m) + "\" x2=\"" + num(X(tx)) + "\" y2=\"" + num(H - m + 4) +
                 "\" stroke=\"black\"/>";
            o += "<text x=\"" + num(X(tx)) + "\" y=\"" + num(H - m + 16) + "\" text-anchor=\"middle\">" + tick(tx) + "</text>\n";
            o += "<line x1=\"" + num(m - 4) + "\" y1=\"" + num(Y(ty)) + "\" x2=\"" + num(m) + "\" y2=\"" + num(Y(ty)) +
                 "\" stroke=\"black\"/>";
            o += "<text x=\"" + num(m - 6) + "\" y=\"" + num(Y(ty) + 3) + "\" text-anchor=\"end\">" + tick(ty) + "</text>\n";
        }
        o += "</g>\n";
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const auto& l = layers_[li];
            o += "<g id=\"layer" + std::to_string(li) + "\" class=\"" + escape(l.label) + "\">\n";
            for (const auto& it : l.items) {
                switch (it.kind) {
                    case Item::dot:
                        o += "<circle cx=\"" + num(X(it.a)) + "\" cy=\"" + num(Y(it.b)) + "\" r=\"" + num(it.c) +
                             "\" fill=\"" + l.color + "\"/>\n";
                        break;
                    case Item::line:
                        o += "<line x1=\"" + num(X(it.a)) + "\" y1=\"" + num(Y(it.b)) + "\" x2=\"" + num(X(it.c)) +
                             "\" y2=\"" + num(Y(it.d)) + "\" stroke=\"" + l.color + "\" stroke-width=\"1\"/>\n";
                        break;
                    case Item::rect:
                        o += "<rect class=\"box\" x=\"" + num(X(it.a)) + "\" y=\"" + num(Y(it.d)) + "\" width=\"" +
                             num(X(it.c) - X(it.a)) + "\" height=\"" + num(Y(it.b) - Y(it.d)) + "\" fill=\"" + l.color +
                             "\" fill-opacity=\"0.15\" stroke=\"" + l.color + "\" stroke-width=\"0.5\"/>\n";
                        break;
                }
            }
            o += "</g>\n";
        }
        // legend
        o += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
        double ly = m + 14;
        for (const auto& l : layers_) {
            o += "<rect x=\"" + num(W - m - 150) + "\" y=\"" + num(ly - 9) + "\" width=\"10\" height=\"10\" fill=\"" + l.color +
                 "\"/><text x=\"" + num(W - m - 134) + "\" y=\"" + num(ly) + "\">" + escape(l.label) + "</text>\n";
            ly += 15;
        }
        if (!s_.resolution_note.empty())
            o += "<text x=\"" + num(m) + "\" y=\"" + num(H - 12) + "\">" + escape(s_.resolution_note) + "</text>\n";
        o += "</g>\n</svg>\n";
        return o;
    }

private:
    struct Item {
        enum Kind { dot, line, rect } kind;
        double a, b, c, d;
    };
    struct Layer {
        std::string label, color;
        std::vector<Item> items;
    };

    static void require_2d(const std::vector<Point>& pts) {
        for (const auto& p : pts)
            if (ambient_dim(p.tag) != 2)
                throw unsupported_error("svg: only 2D data can be drawn; project 3D data to a coordinate plane "
                                        "(e.g. drop z) and render the projection");
    }
    void fit(const std::vector<Point>& pts) {
        if (fixed_) return;
        for (const auto& p : pts) {
            if (!have_data_) {
                x0_ = x1_ = p.c[0];
                y0_ = y1_ = p.c[1];
                have_data_ = true;
            }
            x0_ = std::min(x0_, p.c[0]); x1_ = std::max(x1_, p.c[0]);
            y0_ = std::min(y0_, p.c[1]); y1_ = std::max(y1_, p.c[1]);
        }
    }
    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }
    static std::string tick(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", std::fabs(v) < 1e-12 ? 0.0 : v);
        return buf;
    }
    static std::string escape(const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '<') o += "&lt;";
            else if (c == '>') o += "&gt;";
            else if (c == '&') o += "&amp;";
            else if (c == '"') o += "&quot;";
            else o += c;
        }
        return o;
    }

    Style s_;
    std::vector<Layer> layers_;
    double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
    bool fixed_ = false, have_data_ = false;
};

}  // namespace explab::svg
