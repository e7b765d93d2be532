#include <walk/renderer.hpp>

namespace walk {

namespace {

auto escape_html(std::string_view text) -> std::string {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '"':
                out += "&quot;";
                break;
            case '\'':
                out += "&#39;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

// JSON placed inside a <script> element must not contain "</".
auto script_safe(const std::string& json) -> std::string {
    std::string out;
    out.reserve(json.size());
    for (std::size_t i = 0; i < json.size(); ++i) {
        if (json[i] == '<' && i + 1 < json.size() && (json[i + 1] == '/' || json[i + 1] == '!')) {
            out += "\\u003c";
            continue;
        }
        out += json[i];
    }
    return out;
}

constexpr std::string_view kHead = R"HTML(<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>walkd export</title>
<script src="https://cdn.jsdelivr.net/npm/vega@5.30.0"></script>
<script src="https://cdn.jsdelivr.net/npm/vega-lite@5.23.0"></script>
<script src="https://cdn.jsdelivr.net/npm/vega-embed@6.26.0"></script>
<style>
body { font-family: system-ui, sans-serif; margin: 0; }
.gw-tabs { display: flex; gap: 2px; border-bottom: 1px solid #ccc; padding: 8px 8px 0; }
.gw-tab { border: 1px solid #ccc; border-bottom: none; background: #f4f4f4; padding: 6px 14px; cursor: pointer; }
.gw-tab.active { background: #fff; font-weight: 600; }
.gw-panel { display: none; padding: 16px; }
.gw-panel.active { display: block; }
.gw-pivot table { border-collapse: collapse; font-size: 13px; }
.gw-pivot th, .gw-pivot td { border: 1px solid #ddd; padding: 3px 8px; }
.gw-pivot td { text-align: right; }
.gw-pivot button { font-size: 11px; margin-right: 4px; padding: 0 4px; }
.gw-empty { color: #777; padding: 16px; }
</style>
</head>
<body>
)HTML";

constexpr std::string_view kScript = R"JS(<script>
(function () {
  var tabs = JSON.parse(document.getElementById("gw-data").textContent);
  var buttons = document.querySelectorAll(".gw-tab");
  var panels = document.querySelectorAll(".gw-panel");
  function show(i) {
    buttons.forEach(function (b, k) { b.classList.toggle("active", k === i); });
    panels.forEach(function (p, k) { p.classList.toggle("active", k === i); });
  }
  buttons.forEach(function (b, k) { b.addEventListener("click", function () { show(k); }); });

  function label(v) { return v === null ? "(null)" : String(v); }
  function key(col, row) { return JSON.stringify([col, row]); }

  // Visible header entries: expanded nodes show their children, collapsed
  // ones stand for their own prefix roll-up.
  function visible(node, path, open, out, first) {
    if (node.children.length === 0 || (node.depth > 0 && !open[JSON.stringify(path)])) {
      out.push({ path: path, node: node, first: first });
      return out;
    }
    node.children.forEach(function (c, k) {
      visible(c, path.concat([c.value]), open, out, k === 0);
    });
    return out;
  }

  function renderPivot(el, model) {
    var openCols = {}, openRows = {};
    var cells = {};
    model.cells.forEach(function (c) { cells[key(c.col, c.row)] = c.values; });
    function toggle(open, path) {
      var b = document.createElement("button");
      var k = JSON.stringify(path);
      b.textContent = open[k] ? "-" : "+";
      b.addEventListener("click", function () { open[k] = !open[k]; draw(); });
      return b;
    }
    function header(entry, open, depthMax) {
      var th = document.createElement("th");
      if (entry.first && entry.path.length > 1) {
        th.appendChild(toggle(open, entry.path.slice(0, -1)));
      }
      if (entry.node.children.length > 0 && entry.path.length > 0 && entry.path.length < depthMax) {
        th.appendChild(toggle(open, entry.path));
      }
      th.appendChild(document.createTextNode(entry.path.length ? entry.path.map(label).join(" / ") : "Total"));
      return th;
    }
    function draw() {
      var cols = visible(model.col_tree, [], openCols, [], false);
      var rows = visible(model.row_tree, [], openRows, [], false);
      var table = document.createElement("table");
      var head = table.insertRow();
      head.appendChild(document.createElement("th"));
      cols.forEach(function (c) {
        model.measures.forEach(function (m) {
          var th = header(c, openCols, model.col_path.length);
          th.appendChild(document.createTextNode(" " + m.out_fid));
          head.appendChild(th);
        });
      });
      rows.forEach(function (r) {
        var tr = table.insertRow();
        tr.appendChild(header(r, openRows, model.row_path.length));
        cols.forEach(function (c) {
          var values = cells[key(c.path, r.path)] || [];
          model.measures.forEach(function (m, i) {
            var td = tr.insertCell();
            td.textContent = values[i] === undefined || values[i] === null ? "" : values[i];
          });
        });
      });
      el.innerHTML = "";
      el.appendChild(table);
    }
    draw();
  }

  tabs.forEach(function (tab, i) {
    if (tab.kind === "pivot") {
      renderPivot(document.getElementById("gw-pivot-" + i), tab.doc);
    } else if (window.vegaEmbed) {
      vegaEmbed("#gw-chart-" + i, tab.doc, { actions: false });
    }
  });
  if (tabs.length > 0) { show(0); }
})();
</script>
)JS";

}  // namespace

auto export_html(const std::vector<ExportTab>& tabs) -> std::string {
    std::string out(kHead);
    out += "<nav class=\"gw-tabs\">\n";
    for (std::size_t i = 0; i < tabs.size(); ++i) {
        out += "<button class=\"gw-tab\" data-tab=\"" + std::to_string(i) + "\">" + escape_html(tabs[i].title) +
               "</button>\n";
    }
    out += "</nav>\n";
    if (tabs.empty()) {
        out += "<p class=\"gw-empty\">No charts.</p>\n";
    }
    OrderedJson data = OrderedJson::array();
    for (std::size_t i = 0; i < tabs.size(); ++i) {
        auto id = std::to_string(i);
        out += "<section class=\"gw-panel\" id=\"gw-tab-" + id + "\">";
        if (tabs[i].pivot) {
            out += "<div class=\"gw-pivot\" id=\"gw-pivot-" + id + "\"></div>";
        } else {
            out += "<div class=\"gw-chart\" id=\"gw-chart-" + id + "\"></div>";
        }
        out += "</section>\n";
        data.push_back({{"kind", tabs[i].pivot ? "pivot" : "chart"}, {"doc", tabs[i].document}});
    }
    out += "<script type=\"application/json\" id=\"gw-data\">" + script_safe(data.dump()) + "</script>\n";
    out += kScript;
    out += "</body>\n</html>\n";
    return out;
}

}  // namespace walk
