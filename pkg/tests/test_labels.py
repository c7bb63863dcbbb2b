import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairloop import (
    INITIAL_LABELS,
    UNCLASSIFIABLE,
    DuplicateLabel,
    EmptyExtension,
    GenderLabel,
    LabelRegistry,
    LabelSet,
    extend,
    initial_label_set,
    validate_feedback,
)

MAN, WOMAN, NON_BINARY = INITIAL_LABELS


def test_initial_set_is_exactly_the_three_labels(label_set):
    assert label_set.version == 1
    assert label_set.labels == (MAN, WOMAN, NON_BINARY)


def test_label_folding_and_equality():
    assert GenderLabel(" WoMan ") == WOMAN
    assert GenderLabel("MAN").name == "man"
    assert GenderLabel("man") != GenderLabel("woman")


@pytest.mark.parametrize("bad", ["", "   ", "two words", "a,b", "a\tb"])
def test_label_rejects_non_tokens(bad):
    with pytest.raises(ValueError):
        GenderLabel(bad)


def test_sentinel_is_distinct_and_never_a_member(label_set):
    assert UNCLASSIFIABLE not in label_set
    assert UNCLASSIFIABLE != MAN
    assert type(UNCLASSIFIABLE)() is UNCLASSIFIABLE  # singleton


def test_validate_feedback_examples(label_set):
    assert validate_feedback("non-binary", label_set).label == NON_BINARY
    assert validate_feedback("", label_set).is_blank
    assert validate_feedback("robot", label_set).is_invalid
    # fold/trim rule applied by hand: "  WoMan " -> "woman"
    verdict = validate_feedback("  WoMan ", label_set)
    assert verdict.is_valid and verdict.label == WOMAN


def test_validate_feedback_none_and_whitespace_are_blank(label_set):
    assert validate_feedback(None, label_set).is_blank
    assert validate_feedback("   \t ", label_set).is_blank


def test_extend_examples(label_set):
    v2 = extend(label_set, [GenderLabel("genderfluid")])
    assert v2.version == 2 and len(v2.labels) == 4
    with pytest.raises(DuplicateLabel):
        extend(label_set, [WOMAN])
    v3 = extend(v2, [GenderLabel("agender"), GenderLabel("bigender")])
    assert v3.version == 3 and len(v3.labels) == 6
    with pytest.raises(EmptyExtension):
        extend(label_set, [])


def test_extend_preserves_order_and_appends(label_set):
    v2 = extend(label_set, [GenderLabel("agender")])
    assert v2.labels[:3] == label_set.labels
    assert v2.labels[3] == GenderLabel("agender")


def test_duplicate_within_extension_rejected(label_set):
    with pytest.raises(DuplicateLabel):
        extend(label_set, [GenderLabel("x"), GenderLabel("x")])


def test_label_set_rejects_internal_duplicates():
    with pytest.raises(DuplicateLabel):
        LabelSet(1, (MAN, GenderLabel("MAN")))


_token = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu"), max_codepoint=0x2FF),
    min_size=1,
    max_size=12,
)


@given(raw=st.one_of(st.just(""), _token, st.sampled_from(["man", "woman", "non-binary"])))
def test_valid_verdicts_always_point_into_the_set(raw):
    label_set = initial_label_set()
    verdict = validate_feedback(raw, label_set)
    if verdict.is_valid:
        assert verdict.label in label_set.labels


@given(
    name=st.sampled_from(["man", "woman", "non-binary"]),
    pad_left=st.text(alphabet=" \t", max_size=3),
    pad_right=st.text(alphabet=" \t", max_size=3),
    upper_mask=st.lists(st.booleans(), min_size=12, max_size=12),
)
def test_validation_invariant_under_case_and_padding(name, pad_left, pad_right, upper_mask):
    mangled = "".join(
        ch.upper() if up else ch for ch, up in zip(name, upper_mask)
    )
    label_set = initial_label_set()
    verdict = validate_feedback(pad_left + mangled + pad_right, label_set)
    assert verdict.is_valid and verdict.label == GenderLabel(name)


@given(new_names=st.lists(_token, min_size=1, max_size=4, unique=True))
def test_extension_monotonicity(new_names):
    base = initial_label_set()
    fresh = [GenderLabel(n) for n in new_names if GenderLabel(n) not in base]
    fresh = list(dict.fromkeys(fresh))
    if not fresh:
        return
    extended = extend(base, fresh)
    assert set(extended.labels) >= set(base.labels)
    assert extended.version == base.version + 1


def test_registry_appends_and_reloads(tmp_path):
    path = tmp_path / "labels.tsv"
    registry = LabelRegistry(path)
    assert registry.current.version == 1
    registry.extend([GenderLabel("genderfluid")])
    assert path.read_text().splitlines() == [
        "1\tman,woman,non-binary",
        "2\tman,woman,non-binary,genderfluid",
    ]
    reloaded = LabelRegistry(path)
    assert reloaded.current.version == 2
    assert reloaded.current.labels == registry.current.labels
    assert [ls.version for ls in reloaded.versions()] == [1, 2]


def test_registry_old_versions_stay_readable(tmp_path):
    registry = LabelRegistry(tmp_path / "labels.tsv")
    v1 = registry.current
    registry.extend([GenderLabel("agender")])
    assert registry.get(1) == v1
    assert len(registry.get(2).labels) == 4
