import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskattr.errors import ParseError, ValidationError
from riskattr.io import (
    default_baseline,
    dumps_option_records,
    load_chain,
    load_option_records,
    parse_option_records,
    parse_vector,
)
from riskattr.pricing import OptionRecord, flat_vol_chain

HEADER = "S,r,tau,K,sigma,price,kind\n"


class TestLoadOptionRecords:
    def test_percent_directive(self):
        recs = parse_option_records("# rates=percent\n" + HEADER + "1433.8,4.26,0.59,1396,0.23,51.2,call\n")
        assert recs[0].r == pytest.approx(0.0426, rel=1e-15)

    def test_decimal_default(self):
        recs = parse_option_records(HEADER + "100,0.05,1,100,0.2,10.45,call\n")
        assert recs[0].r == 0.05 and recs[0].kind == "call"

    def test_header_only(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text(HEADER)
        assert load_option_records(p) == []

    def test_sigma_zero_names_row(self):
        text = HEADER + "100,0.05,1,100,0.2,10,call\n100,0.05,1,100,0,10,call\n"
        with pytest.raises(ValidationError) as err:
            parse_option_records(text)
        assert err.value.rows == [3]
        assert "line 3" in str(err.value)

    def test_all_bad_rows_listed(self):
        text = HEADER + "100,0.05,1,100,0,10,call\n100,0.05,1,100,0.2,10,call\n-1,0.05,1,100,0.2,10,put\n"
        with pytest.raises(ValidationError) as err:
            parse_option_records(text)
        assert err.value.rows == [2, 4]

    @pytest.mark.parametrize("row", ["100,0.05,1,100,0.2,call", "100,abc,1,100,0.2,10,call"])
    def test_malformed_row_has_line_number(self, row):
        with pytest.raises(ParseError) as err:
            parse_option_records("# note\n" + HEADER + row + "\n")
        assert err.value.line == 3

    def test_missing_column(self):
        with pytest.raises(ParseError):
            parse_option_records("S,r,tau,K,price,kind\n")

    def test_date_column(self):
        recs = parse_option_records("S,r,tau,K,sigma,price,kind,date\n100,0.05,1,100,0.2,10,call,2008-01-02\n")
        assert recs[0].date == "2008-01-02"


record = st.builds(
    OptionRecord,
    S=st.floats(1, 5000), r=st.floats(-0.05, 0.2), tau=st.floats(0.001, 5), K=st.floats(1, 5000),
    sigma=st.floats(0.01, 3), price=st.floats(0, 5000), kind=st.sampled_from(["call", "put"]),
    date=st.one_of(st.none(), st.sampled_from(["2008-01-02", "2008-01-03"])),
)


class TestRoundTrip:
    @settings(max_examples=100, deadline=None)
    @given(st.lists(record, max_size=8))
    def test_load_dump_load(self, recs):
        once = parse_option_records(dumps_option_records(recs))
        twice = parse_option_records(dumps_option_records(once))
        assert once == twice
        if all(r.date is not None for r in recs) or not any(r.date for r in recs):
            assert once == list(recs)


class TestHelpers:
    def test_default_baseline_uses_first_date(self):
        recs = [OptionRecord(100, 0.01, 1, 90, 0.2, 1, "call", "2008-01-03"),
                OptionRecord(200, 0.03, 1, 110, 0.4, 1, "call", "2008-01-02"),
                OptionRecord(300, 0.05, 1, 130, 0.6, 1, "call", "2008-01-02")]
        np.testing.assert_allclose(default_baseline(recs), [250, 0.04, 1, 120, 0.5])

    def test_parse_vector(self):
        x = parse_vector("1, 2,3", ("a", "b", "c"))
        np.testing.assert_array_equal(x.values, [1, 2, 3])

    def test_chain_csv(self, tmp_path):
        chain = flat_vol_chain(100.0, 0.2, 0.0)
        K = chain.strikes
        puts = np.concatenate([chain.put_quotes, np.full(chain.call_quotes.size, 9.0)])
        calls = np.concatenate([np.full(chain.put_quotes.size, 9.0), chain.call_quotes])
        p = tmp_path / "chain.csv"
        p.write_text("K,put,call\n" + "".join(f"{float(k)!r},{float(a)!r},{float(b)!r}\n" for k, a, b in zip(K, puts, calls)))
        loaded = load_chain(p, 100.0, 0.0, chain.tau)
        np.testing.assert_array_equal(loaded.otm_quotes(), chain.otm_quotes())
