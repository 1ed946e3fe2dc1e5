"""Manifest loading tests: YAML parsing, defaults, error contexts."""

import pytest

from tmforge.alignment import AnchorTerm
from tmforge.extraction import DEFAULT_BREAK_TAGS
from tmforge.manifest import (
    ManifestError,
    load_anchors_tsv,
    load_chain_file,
    load_crawl_manifest,
    load_project_manifest,
    parse_span_rule,
)

FULL = """\
project: demo-corpus
source_lang: tr
target_lang: en
output_dir: out
crawl:
  seed_urls: ["http://127.0.0.1:1/index.html"]
  max_depth: 2
  rate_limit: 50
  include_patterns: ["*arsiv_*"]
  exclude_patterns: ["*.png"]
prune:
  keep_patterns: ["jvi.aspx*"]
rename:
  source: {find: 'plng=tur&un=(.+)$', replace: 'tr-$1', regex: true}
  target: {find: 'plng=eng&un=(.+)$', replace: 'en-$1', regex: true}
pair:
  source_prefix: tr-
  target_prefix: en-
extraction:
  source:
    encoding: {fallback: windows-1254}
    span_rules:
      - "class='title'>(.*)<hr "
      - {pattern: "abstract>(.*)</div>", lazy: false, description: body}
  target:
    span_rules: ["class='titleeng'>(.*)<hr "]
anchors: anchors.tsv
align:
  confidence_threshold: 0.4
clean:
  checks: [1, 2, 3, 4]
  max_tokens: 80
adminlang: en
license_note: licensed for research
"""


def write(tmp_path, text, name="project.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestProjectManifest:
    def test_full_manifest(self, tmp_path):
        (tmp_path / "anchors.tsv").write_text("AMAÇ\tOBJECTIVE\n", encoding="utf-8")
        m = load_project_manifest(write(tmp_path, FULL))
        assert m.project == "demo-corpus"
        assert (m.source_lang, m.target_lang) == ("tr", "en")
        assert m.output_dir == tmp_path / "out"
        assert m.crawl.max_depth == 2
        assert m.crawl.output_dir == tmp_path / "out" / "mirror"
        assert m.prune_keep_patterns == ["jvi.aspx*"]
        assert m.rename_source.regex is True
        assert m.rename_source.apply("xplng=tur&un=K-1") == "xtr-K-1"
        assert (m.source_prefix, m.target_prefix) == ("tr-", "en-")
        assert m.extraction_source.encoding.fallback == "cp1254"
        assert len(m.extraction_source.chain.span_rules) == 2
        assert m.extraction_source.chain.span_rules[1].lazy is False
        assert m.anchors == [AnchorTerm("AMAÇ", "OBJECTIVE")]
        assert m.align_params.confidence_threshold == 0.4
        assert m.align_params.s2 == 6.8
        assert m.clean_config.checks == (1, 2, 3, 4)
        assert m.clean_config.max_tokens == 80
        assert m.license_note == "licensed for research"

    def test_minimal_manifest_defaults(self, tmp_path):
        minimal = (
            "project: p\nsource_lang: tr\ntarget_lang: en\noutput_dir: out\n"
            "pair: {source_prefix: tr-, target_prefix: en-}\n"
            "extraction:\n  source: {span_rules: ['a(.*)b']}\n  target: {span_rules: ['c(.*)d']}\n"
        )
        m = load_project_manifest(write(tmp_path, minimal))
        assert m.crawl is None
        assert m.rename_source is None
        assert m.prune_keep_patterns == []
        assert m.anchors == []
        assert m.align_params.c == 1.0
        assert m.clean_config.checks == tuple(range(1, 12))
        assert m.extraction_source.encoding.fallback == "utf-8"
        assert m.extraction_source.chain.break_tags == DEFAULT_BREAK_TAGS
        assert m.adminlang == "en"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError, match="manifest not found"):
            load_project_manifest(tmp_path / "absent.yaml")

    def test_invalid_yaml(self, tmp_path):
        with pytest.raises(ManifestError, match="invalid YAML"):
            load_project_manifest(write(tmp_path, "a: [unclosed"))

    def test_non_mapping_top_level(self, tmp_path):
        with pytest.raises(ManifestError, match="top level must be a mapping"):
            load_project_manifest(write(tmp_path, "- just\n- a list\n"))

    @pytest.mark.parametrize("key", ["project", "source_lang", "target_lang", "output_dir"])
    def test_missing_required_keys(self, tmp_path, key):
        lines = {
            "project": "project: p",
            "source_lang": "source_lang: tr",
            "target_lang": "target_lang: en",
            "output_dir": "output_dir: out",
        }
        text = "\n".join(v for k, v in lines.items() if k != key) + (
            "\npair: {source_prefix: tr-, target_prefix: en-}\n"
            "extraction:\n  source: {span_rules: []}\n  target: {span_rules: []}\n"
        )
        with pytest.raises(ManifestError, match="missing required key %r" % key):
            load_project_manifest(write(tmp_path, text))

    def test_missing_pair_section(self, tmp_path):
        text = "project: p\nsource_lang: tr\ntarget_lang: en\noutput_dir: out\n"
        with pytest.raises(ManifestError, match="missing required key 'pair'"):
            load_project_manifest(write(tmp_path, text))

    def test_missing_pair_prefix_has_context(self, tmp_path):
        text = (
            "project: p\nsource_lang: tr\ntarget_lang: en\noutput_dir: out\n"
            "pair: {source_prefix: tr-}\n"
            "extraction:\n  source: {span_rules: []}\n  target: {span_rules: []}\n"
        )
        with pytest.raises(ManifestError, match=r"pair: missing required key 'target_prefix'"):
            load_project_manifest(write(tmp_path, text))

    def test_missing_extraction_side_has_context(self, tmp_path):
        text = (
            "project: p\nsource_lang: tr\ntarget_lang: en\noutput_dir: out\n"
            "pair: {source_prefix: tr-, target_prefix: en-}\n"
            "extraction: {source: {span_rules: []}}\n"
        )
        with pytest.raises(ManifestError, match=r"extraction: missing required key 'target'"):
            load_project_manifest(write(tmp_path, text))

    def test_bad_align_params_context(self, tmp_path):
        text = (
            "project: p\nsource_lang: tr\ntarget_lang: en\noutput_dir: out\n"
            "pair: {source_prefix: tr-, target_prefix: en-}\n"
            "extraction:\n  source: {span_rules: []}\n  target: {span_rules: []}\n"
            "align: {s2: -1}\n"
        )
        with pytest.raises(ManifestError, match=r"align: c and s2 must be positive"):
            load_project_manifest(write(tmp_path, text))

    def test_bad_encoding_context(self, tmp_path):
        text = (
            "project: p\nsource_lang: tr\ntarget_lang: en\noutput_dir: out\n"
            "pair: {source_prefix: tr-, target_prefix: en-}\n"
            "extraction:\n  source: {encoding: {fallback: klingon-8}, span_rules: []}\n"
            "  target: {span_rules: []}\n"
        )
        with pytest.raises(ManifestError, match="extraction:source.*unknown codepage"):
            load_project_manifest(write(tmp_path, text))

    def test_custom_bead_priors(self, tmp_path):
        text = (
            "project: p\nsource_lang: tr\ntarget_lang: en\noutput_dir: out\n"
            "pair: {source_prefix: tr-, target_prefix: en-}\n"
            "extraction:\n  source: {span_rules: []}\n  target: {span_rules: []}\n"
            "align:\n  bead_priors: {'1-1': 0.9, '1-0': 0.01, '0-1': 0.01,"
            " '2-1': 0.03, '1-2': 0.03, '2-2': 0.02}\n"
        )
        m = load_project_manifest(write(tmp_path, text))
        assert m.align_params.bead_priors["1-1"] == 0.9

    def test_incomplete_bead_priors_rejected(self, tmp_path):
        text = (
            "project: p\nsource_lang: tr\ntarget_lang: en\noutput_dir: out\n"
            "pair: {source_prefix: tr-, target_prefix: en-}\n"
            "extraction:\n  source: {span_rules: []}\n  target: {span_rules: []}\n"
            "align:\n  bead_priors: {'1-1': 0.9}\n"
        )
        with pytest.raises(ManifestError, match="bead_priors missing entries"):
            load_project_manifest(write(tmp_path, text))


class TestSpanRuleParsing:
    def test_string_form(self):
        rule = parse_span_rule("a(.*)b")
        assert rule.pattern == "a(.*)b" and rule.lazy is True

    def test_mapping_form(self):
        rule = parse_span_rule({"pattern": "x", "lazy": False, "description": "d"})
        assert (rule.pattern, rule.lazy, rule.description) == ("x", False, "d")

    def test_mapping_requires_pattern(self):
        with pytest.raises(ManifestError, match="missing required key 'pattern'"):
            parse_span_rule({"lazy": True})

    def test_other_types_rejected(self):
        with pytest.raises(ManifestError, match="string or a mapping"):
            parse_span_rule(42)


class TestChainFile:
    def test_loads_both_sides(self, tmp_path):
        path = write(
            tmp_path,
            "source: {span_rules: ['a(.*)b']}\ntarget: {span_rules: ['c(.*)d']}\n",
            "chains.yaml",
        )
        chains = load_chain_file(path)
        assert set(chains) == {"source", "target"}
        assert chains["source"].chain.span_rules[0].pattern == "a(.*)b"

    def test_missing_side(self, tmp_path):
        path = write(tmp_path, "source: {span_rules: []}\n", "chains.yaml")
        with pytest.raises(ManifestError, match="missing required key 'target'"):
            load_chain_file(path)


class TestAnchorsTsv:
    def test_parses_pairs_comments_blanks(self, tmp_path):
        path = tmp_path / "anchors.tsv"
        path.write_text(
            "# heading terms\nAMAÇ\tOBJECTIVE\n\nYÖNTEM\tMETHOD\n  \n", encoding="utf-8"
        )
        assert load_anchors_tsv(path) == [
            AnchorTerm("AMAÇ", "OBJECTIVE"),
            AnchorTerm("YÖNTEM", "METHOD"),
        ]

    def test_strips_cell_whitespace(self, tmp_path):
        path = tmp_path / "anchors.tsv"
        path.write_text(" AMAÇ \t OBJECTIVE \n", encoding="utf-8")
        assert load_anchors_tsv(path) == [AnchorTerm("AMAÇ", "OBJECTIVE")]

    @pytest.mark.parametrize("line", ["justone", "a\tb\tc", "\tb", "a\t"])
    def test_malformed_line_reports_position(self, tmp_path, line):
        path = tmp_path / "anchors.tsv"
        path.write_text("AMAÇ\tOBJECTIVE\n%s\n" % line, encoding="utf-8")
        with pytest.raises(ManifestError, match=r"anchors\.tsv:2"):
            load_anchors_tsv(path)


class TestCrawlManifestFile:
    def test_standalone_crawl_manifest(self, tmp_path):
        path = write(
            tmp_path,
            "seed_urls: ['http://127.0.0.1:1/']\noutput_dir: mirror\nmax_depth: 1\n",
            "crawl.yaml",
        )
        m = load_crawl_manifest(path)
        assert m.output_dir == tmp_path / "mirror"
        assert m.max_depth == 1
        assert m.obey_robots is True

    def test_requires_output_dir(self, tmp_path):
        path = write(tmp_path, "seed_urls: ['http://x/']\n", "crawl.yaml")
        with pytest.raises(ManifestError, match="missing required key 'output_dir'"):
            load_crawl_manifest(path)

    def test_bad_values_become_manifest_errors(self, tmp_path):
        path = write(
            tmp_path,
            "seed_urls: ['http://x/']\noutput_dir: m\nrate_limit: 0\n",
            "crawl.yaml",
        )
        with pytest.raises(ManifestError, match="rate_limit must be positive"):
            load_crawl_manifest(path)
