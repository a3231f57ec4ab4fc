#ifndef TREESOS_GRAPH_IO_HPP
#define TREESOS_GRAPH_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "treesos/graph.hpp"

namespace treesos {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// McKay graph6 encoding, bit-exact. Supports n <= 258047.
std::string to_graph6(const Graph& g);
Graph from_graph6(const std::string& line);

/// All graph6 lines of a stream (blank lines and a leading ">>graph6<<"
/// header are skipped).
std::vector<Graph> read_graph6_stream(std::istream& in);

/// Whitespace-separated edge list: "n m" header, then m lines "u v".
std::string to_edgelist(const Graph& g);
Graph from_edgelist(const std::string& text);

enum class GraphFormat { Graph6, EdgeList };
std::string write_graph(const Graph& g, GraphFormat f);
Graph read_graph(const std::string& text, GraphFormat f);

}  // namespace treesos

#endif
