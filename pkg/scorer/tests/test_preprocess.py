from abusescorer import preprocess


def test_linebreaks_removed_and_lowercased():
    assert preprocess("Hello\nWORLD") == "hello world"


def test_duplicate_whitespace_collapsed():
    assert preprocess("a  b") == "a b"


def test_clean_text_unchanged():
    text = "already clean lowercase text"
    assert preprocess(text) == text


def test_idempotent():
    messy = "@Someone check  THIS\nhttps://example.com/x now"
    once = preprocess(messy)
    assert preprocess(once) == once


def test_handles_and_urls_masked():
    out = preprocess("@Bully said http://bad.example is fine")
    assert out == "@user said http is fine"


def test_lone_at_sign_kept():
    assert preprocess("meet @ noon") == "meet @ noon"


def test_windows_linebreaks():
    assert preprocess("one\r\ntwo\rthree") == "one two three"
