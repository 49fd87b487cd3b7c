import pytest

from privgraph.edgelist import SIGNED_MARKER, format_graph, load_graph, parse_graph, save_graph, write_values_csv
from privgraph.errors import EdgeListError
from privgraph.graph import Graph


def test_save_load_preserves_weights_bit_exactly(tmp_path):
    G = Graph.from_edges(5, [(0, 1, 0.1), (1, 4, 1.0 / 3.0), (2, 3, 1e-300), (0, 4, 12345.678901234567)])
    path = tmp_path / "g.el"
    save_graph(G, path)
    loaded = load_graph(path)
    assert loaded.n == 5
    assert dict(loaded.weights) == dict(G.weights)


def test_header_only_is_empty_graph():
    G = parse_graph("# a comment\nn 3\n")
    assert G.n == 3
    assert G.stored_count == 0


def test_comments_and_blank_lines():
    G = parse_graph("n 4\n\n# skip\n0 3 2.5\n  1 2 1\n")
    assert G.weight(0, 3) == 2.5
    assert G.weight(2, 1) == 1.0


@pytest.mark.parametrize(
    "text, line",
    [
        ("n 3\n0 1 1\n0 1\n", 3),
        ("n 3\n0 1 abc\n", 2),
        ("n 3\n0 0 1\n", 2),
        ("n 3\n0 5 1\n", 2),
        ("n 3\n0 1 1\n1 0 2\n", 3),
        ("n 3\n0 1 -1\n", 2),
        ("n 3\n0 1 inf\n", 2),
        ("3\n", 1),
        ("n -2\n", 1),
    ],
)
def test_errors_name_the_line(text, line):
    with pytest.raises(EdgeListError) as exc:
        parse_graph(text, source="g.el")
    assert exc.value.loc is not None
    assert exc.value.loc.line == line
    assert f"g.el:{line}" in str(exc.value)


def test_missing_header():
    with pytest.raises(EdgeListError):
        parse_graph("# nothing here\n")


def test_negative_weights_with_opt_in(tmp_path):
    G = Graph.from_edges(3, [(0, 1, -1.5), (1, 2, 2.0)], signed=True)
    text = format_graph(G)
    assert text.splitlines()[0] == SIGNED_MARKER
    path = tmp_path / "signed.el"
    save_graph(G, path)
    with pytest.raises(EdgeListError):
        load_graph(path)
    loaded = load_graph(path, allow_negative=True)
    assert loaded.signed
    assert loaded.weight(0, 1) == -1.5


def test_missing_file_is_edge_list_error(tmp_path):
    with pytest.raises(EdgeListError):
        load_graph(tmp_path / "absent.el")


def test_values_csv(tmp_path):
    path = tmp_path / "out" / "r.csv"
    write_values_csv(path, ("u", "v", "value"), [(0, 1, 0.5), (0, 2, 1.0 / 3.0)])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "u,v,value"
    assert lines[1] == "0,1,0.5"
    assert float(lines[2].split(",")[2]) == 1.0 / 3.0
