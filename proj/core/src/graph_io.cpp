#include "treesos/graph_io.hpp"

#include <istream>
#include <sstream>

namespace treesos {

namespace {

void append_size(std::string& out, int n) {
    if (n <= 62) {
        out.push_back(char(n + 63));
    } else if (n <= 258047) {
        out.push_back(char(126));
        out.push_back(char(((n >> 12) & 63) + 63));
        out.push_back(char(((n >> 6) & 63) + 63));
        out.push_back(char((n & 63) + 63));
    } else {
        throw ParseError("graph6: order too large");
    }
}

int parse_size(const std::string& s, std::size_t& pos) {
    if (pos >= s.size()) throw ParseError("graph6: empty");
    unsigned char c = s[pos];
    if (c == 126) {
        if (pos + 1 < s.size() && (unsigned char)s[pos + 1] == 126)
            throw ParseError("graph6: order >= 258048 unsupported");
        if (pos + 3 >= s.size()) throw ParseError("graph6: truncated order");
        int n = 0;
        for (int i = 1; i <= 3; ++i) {
            int d = (unsigned char)s[pos + i] - 63;
            if (d < 0 || d > 63) throw ParseError("graph6: bad order byte");
            n = (n << 6) | d;
        }
        pos += 4;
        return n;
    }
    if (c < 63 || c > 126) throw ParseError("graph6: bad order byte");
    pos += 1;
    return c - 63;
}

}  // namespace

std::string to_graph6(const Graph& g) {
    std::string out;
    int n = g.n();
    append_size(out, n);
    // Upper triangle in column order: (0,1),(0,2),(1,2),(0,3),...
    int acc = 0, nbits = 0;
    for (int j = 1; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            acc = (acc << 1) | (g.has_edge(i, j) ? 1 : 0);
            if (++nbits == 6) {
                out.push_back(char(acc + 63));
                acc = 0;
                nbits = 0;
            }
        }
    }
    if (nbits > 0) out.push_back(char((acc << (6 - nbits)) + 63));
    return out;
}

Graph from_graph6(const std::string& line) {
    std::size_t pos = 0;
    int n = parse_size(line, pos);
    Graph g(n);
    long long need = (long long)n * (n - 1) / 2;
    long long have = (long long)(line.size() - pos) * 6;
    if (have < need) throw ParseError("graph6: truncated adjacency bits");
    long long bit = 0;
    int i = 0, j = 1;
    for (std::size_t p = pos; p < line.size() && bit < need; ++p) {
        int d = (unsigned char)line[p] - 63;
        if (d < 0 || d > 63) throw ParseError("graph6: bad data byte");
        for (int b = 5; b >= 0 && bit < need; --b, ++bit) {
            if ((d >> b) & 1) g.add_edge(i, j);
            if (++i == j) {
                i = 0;
                ++j;
            }
        }
    }
    return g;
}

std::vector<Graph> read_graph6_stream(std::istream& in) {
    std::vector<Graph> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        if (line.rfind(">>graph6<<", 0) == 0) line = line.substr(10);
        if (line.empty()) continue;
        out.push_back(from_graph6(line));
    }
    return out;
}

std::string to_edgelist(const Graph& g) {
    std::ostringstream out;
    out << g.n() << " " << g.edge_count() << "\n";
    for (int u = 0; u < g.n(); ++u)
        for (int v = g.neighbors(u).next(u); v >= 0; v = g.neighbors(u).next(v))
            out << u << " " << v << "\n";
    return out.str();
}

Graph from_edgelist(const std::string& text) {
    std::istringstream in(text);
    long long n = -1, m = -1;
    if (!(in >> n >> m) || n < 0 || m < 0) throw ParseError("edgelist: bad header");
    Graph g(static_cast<int>(n));
    for (long long e = 0; e < m; ++e) {
        long long u, v;
        if (!(in >> u >> v)) throw ParseError("edgelist: truncated");
        if (u < 0 || v < 0 || u >= n || v >= n || u == v)
            throw ParseError("edgelist: bad endpoint");
        g.add_edge(int(u), int(v));
    }
    if (g.edge_count() != m) throw ParseError("edgelist: duplicate edges in input");
    return g;
}

std::string write_graph(const Graph& g, GraphFormat f) {
    return f == GraphFormat::Graph6 ? to_graph6(g) : to_edgelist(g);
}

Graph read_graph(const std::string& text, GraphFormat f) {
    if (f == GraphFormat::Graph6) {
        std::string line = text;
        while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
        if (line.rfind(">>graph6<<", 0) == 0) line = line.substr(10);
        return from_graph6(line);
    }
    return from_edgelist(text);
}

}  // namespace treesos
