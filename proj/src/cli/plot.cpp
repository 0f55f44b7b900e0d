#include "entangle/cli/plot.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace entangle::cli {

namespace {

constexpr double kWidth = 760.0;
constexpr double kPanelHeight = 130.0;
constexpr double kGap = 28.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;

std::string fmt(double v, int digits = 2) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Panel {
    double top;
    double y_min;
    double y_max;
    double t0;
    double t1;

    double x(double t) const { return kLeft + (t - t0) / (t1 - t0) * (kWidth - kLeft - kRight); }
    double y(double v) const { return top + (y_max - v) / (y_max - y_min) * kPanelHeight; }
};

void frame(std::string& svg, const Panel& p, const std::string& label, double tick_lo, double tick_hi) {
    svg += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(p.top) + "\" width=\"" + fmt(kWidth - kLeft - kRight) +
           "\" height=\"" + fmt(kPanelHeight) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg += "<text x=\"12\" y=\"" + fmt(p.top + kPanelHeight / 2) + "\" font-size=\"13\">" + escape(label) + "</text>\n";
    for (double v : {tick_lo, tick_hi}) {
        svg += "<text x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(p.y(v) + 4) +
               "\" font-size=\"10\" text-anchor=\"end\">" + fmt(v, 1) + "</text>\n";
        svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(p.y(v)) + "\" x2=\"" + fmt(kWidth - kRight) + "\" y2=\"" +
               fmt(p.y(v)) + "\" stroke=\"#ddd\" stroke-dasharray=\"3,3\"/>\n";
    }
}

}  // namespace

std::string render_trajectory_svg(const Trajectory& traj, const std::string& title) {
    const ControlSchedule& sched = traj.schedule;
    const int m = sched.n_controls();
    const double t0 = sched.t_start();
    const double t1 = sched.t_end();
    const double height = kTop + (m + 1) * (kPanelHeight + kGap) + 10.0;

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth, 0) + "\" height=\"" +
                      fmt(height, 0) + "\" font-family=\"sans-serif\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" + escape(title) +
           "</text>\n";

    const double u_max = sched.u_max();
    for (int k = 0; k < m; ++k) {
        const Panel p{kTop + k * (kPanelHeight + kGap), -1.25 * u_max, 1.25 * u_max, t0, t1};
        frame(svg, p, "u" + std::to_string(k + 1) + "(t)", -u_max, u_max);
        std::string pts;
        for (int i = 0; i < sched.n_steps(); ++i) {
            const double v = sched.value(i, k);
            pts += fmt(p.x(sched.time(i))) + "," + fmt(p.y(v)) + " ";
            pts += fmt(p.x(sched.time(i + 1))) + "," + fmt(p.y(v)) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }

    const Panel c{kTop + m * (kPanelHeight + kGap), -0.05, 1.05, t0, t1};
    frame(svg, c, "E_c(t)", 0.0, 1.0);
    std::string pts;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        pts += fmt(c.x(traj.times[i])) + "," + fmt(c.y(traj.concurrences[i])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    svg += "<text x=\"" + fmt(kLeft) + "\" y=\"" + fmt(c.top + kPanelHeight + 16) + "\" font-size=\"10\">" +
           fmt(t0) + "</text>\n";
    svg += "<text x=\"" + fmt(kWidth - kRight) + "\" y=\"" + fmt(c.top + kPanelHeight + 16) +
           "\" font-size=\"10\" text-anchor=\"end\">t = " + fmt(t1) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace entangle::cli
