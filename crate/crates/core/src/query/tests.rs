use super::*;
use proptest::prelude::*;

fn t(id: &str, headers: &[&str], rows: &[&[&str]]) -> Table {
    Table::new(
        id,
        headers.iter().map(|s| s.to_string()).collect(),
        rows.iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect(),
    )
    .unwrap()
}

fn presidents() -> Table {
    t(
        "presidents",
        &["President", "Party", "Took office"],
        &[
            &["George Washington", "None", "1789"],
            &["John Adams", "Federalist", "1797"],
            &["Thomas Jefferson", "Democratic-Republican", "1801"],
            &["Jimmy Carter", "Democratic", "1977"],
        ],
    )
}

fn toy_store() -> EmbeddingStore {
    EmbeddingStore::parse(
        "husband 0.9 0.1 0.0\nspouse 0.85 0.2 0.05\nborn 0.0 0.9 0.3\nheight 0.1 0.2 0.95\n",
    )
    .unwrap()
}

fn run(q: &str, table: &Table) -> Result<CellSet, QueryError> {
    execute(
        &parse_query(q)?,
        table,
        &toy_store(),
        &SimMatchConfig::default(),
    )
}

#[test]
fn parses_quoted_projection_without_where() {
    let q = parse_query(r#"SELECT "born" FROM "Donald-Trump""#).unwrap();
    assert_eq!(q.select, vec!["born"]);
    assert_eq!(q.from_table, "Donald-Trump");
    assert!(q.conditions.is_empty());
    assert_eq!(q.order_by, None);
    assert_eq!(q.limit, None);
}

#[test]
fn bare_identifiers_and_lowercase_keywords() {
    let q = parse_query("select born from Donald-Trump").unwrap();
    assert_eq!(q, StructuredQuery::new(vec!["born".into()], "Donald-Trump"));
}

#[test]
fn parses_sim_match_conjunct() {
    let q = parse_query(r#"SELECT "Value" FROM "T" WHERE "Key" ~ 'birthday'"#).unwrap();
    assert_eq!(q.conditions, vec![Condition::sim("Key", "birthday")]);
}

#[test]
fn parses_every_operator_and_tail_clauses() {
    let q = parse_query(
        r#"SELECT a, "b c" FROM t WHERE a LIKE 'x' AND b = 'it''s' AND c > 3 AND d < '4.5' ORDER BY "Date" DESCENDING LIMIT 1"#,
    )
    .unwrap();
    let ops: Vec<Op> = q.conditions.iter().map(|c| c.op).collect();
    assert_eq!(ops, vec![Op::Like, Op::Equals, Op::Greater, Op::Less]);
    assert_eq!(q.conditions[1].keyword, "it's");
    assert_eq!(q.conditions[2].keyword, "3");
    assert_eq!(
        q.order_by,
        Some(OrderBy {
            column: "Date".into(),
            direction: Direction::Desc
        })
    );
    assert_eq!(q.limit, Some(1));
    assert_eq!(q.select, vec!["a", "b c"]);
}

#[test]
fn missing_projection_is_a_syntax_error() {
    match parse_query("SELECT FROM T") {
        Err(QueryError::Syntax { position, .. }) => assert_eq!(position, 7),
        other => panic!("{other:?}"),
    }
}

#[test]
fn other_syntax_errors_report_positions() {
    for (text, pos) in [
        ("SELECT a", 8),
        ("SELECT a FROM t WHERE b 'x'", 24),
        ("SELECT a FROM t LIMIT 0", 22),
        ("SELECT a FROM t trailing", 16),
        ("SELECT a FROM 't'", 14),
        ("SELECT a FROM t WHERE b ~ 'open", 26),
        ("SELECT a; FROM t", 8),
    ] {
        match parse_query(text) {
            Err(QueryError::Syntax { position, .. }) => assert_eq!(position, pos, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn complex_constructs_are_flagged_as_unsupported() {
    for (text, construct) in [
        ("SELECT a FROM t JOIN u", "JOIN"),
        ("SELECT a FROM t WHERE b ~ 'x' OR c ~ 'y'", "OR"),
        ("SELECT COUNT(a) FROM t", "aggregate function"),
        ("SELECT a FROM t WHERE b > EXTERNAL(now)", "EXTERNAL()"),
        ("SELECT a FROM (SELECT b FROM t)", "subquery"),
        ("SELECT a FROM t GROUP BY a", "grouping"),
    ] {
        match parse_query(text) {
            Err(QueryError::UnsupportedConstruct { construct: c, .. }) => {
                assert_eq!(c, construct, "{text}")
            }
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn printer_is_canonical() {
    let q = parse_query("select a , b from t where c ~ 'x' order by a limit 2").unwrap();
    assert_eq!(
        q.to_string(),
        r#"SELECT "a", "b" FROM "t" WHERE "c" ~ 'x' ORDER BY "a" ASC LIMIT 2"#
    );
}

#[test]
fn empty_where_selects_every_row() {
    let cells = run("SELECT President, Party FROM presidents", &presidents()).unwrap();
    assert_eq!(cells.len(), 8);
    assert_eq!(cells.rows().len(), 4);
}

#[test]
fn sim_match_finds_washington_row() {
    let cells = run(
        r#"SELECT "Took office" FROM presidents WHERE "President" ~ 'washington'"#,
        &presidents(),
    )
    .unwrap();
    assert_eq!(cells, [(0, 2)].into_iter().collect());
}

#[test]
fn order_by_date_desc_limit_one_picks_latest() {
    let table = t(
        "fights",
        &["Opponent", "Date"],
        &[
            &["Frank Mir", "2008-02-02"],
            &["Randy Couture", "2008-11-15"],
            &["Shane Carwin", "2010-07-03"],
        ],
    );
    let cells = run(
        r#"SELECT "Opponent" FROM fights ORDER BY "Date" DESC LIMIT 1"#,
        &table,
    )
    .unwrap();
    assert_eq!(cells, [(2, 0)].into_iter().collect());
    let first = run(
        r#"SELECT "Opponent" FROM fights ORDER BY "Date" ASC LIMIT 1"#,
        &table,
    )
    .unwrap();
    assert_eq!(first, [(0, 0)].into_iter().collect());
}

#[test]
fn order_by_numeric_column_compares_values_not_text() {
    let table = t("n", &["x"], &[&["9"], &["10"], &["1,200"]]);
    let q = r#"SELECT x FROM n ORDER BY x DESC LIMIT 1"#;
    assert_eq!(run(q, &table).unwrap(), [(2, 0)].into_iter().collect());
}

#[test]
fn descending_sort_keeps_ties_in_table_order() {
    let table = t("n", &["k", "v"], &[&["a", "1"], &["b", "2"], &["c", "2"]]);
    let q = parse_query("SELECT k FROM n ORDER BY v DESC LIMIT 1").unwrap();
    let cells = execute(&q, &table, &toy_store(), &SimMatchConfig::default()).unwrap();
    assert_eq!(cells, [(1, 0)].into_iter().collect());
}

#[test]
fn like_equals_and_numeric_operators() {
    let p = presidents();
    assert_eq!(
        run(
            r#"SELECT President FROM presidents WHERE Party LIKE 'democratic'"#,
            &p
        )
        .unwrap()
        .rows(),
        [2, 3].into_iter().collect()
    );
    assert_eq!(
        run(
            r#"SELECT President FROM presidents WHERE Party = 'Democratic'"#,
            &p
        )
        .unwrap()
        .rows(),
        [3].into_iter().collect()
    );
    assert_eq!(
        run(r#"SELECT President FROM presidents WHERE "Took office" > 1790 AND "Took office" < '1900'"#, &p)
            .unwrap()
            .rows(),
        [1, 2].into_iter().collect()
    );
}

#[test]
fn execution_errors() {
    let p = presidents();
    assert_eq!(
        run("SELECT Age FROM presidents", &p),
        Err(QueryError::UnknownColumn("Age".into()))
    );
    assert!(matches!(
        run("SELECT Party FROM presidents WHERE President > 3", &p),
        Err(QueryError::NonNumericComparison { .. })
    ));
    assert!(matches!(
        run("SELECT Party FROM other", &p),
        Err(QueryError::TableMismatch { .. })
    ));
}

#[test]
fn embedding_sim_match_in_where() {
    let kv = t(
        "Whoopi-Goldberg",
        &["Key", "Value"],
        &[&["Spouse", "Lyle Trachtenberg"], &["Born", "1955"]],
    );
    let cells = run(
        r#"SELECT "Value" FROM "Whoopi-Goldberg" WHERE "Key" ~ 'husband'"#,
        &kv,
    )
    .unwrap();
    assert_eq!(cells, [(0, 1)].into_iter().collect());
}

#[test]
fn word_match_without_pairs_keeps_all_rows() {
    assert_eq!(select_rows_word_match(&presidents(), &[]), (0..4).collect());
}

#[test]
fn word_match_single_hit() {
    let rows = select_rows_word_match(&presidents(), &[(0, "jefferson".into())]);
    assert_eq!(rows, [2].into_iter().collect());
}

#[test]
fn word_match_highest_score_wins() {
    let table = t(
        "m",
        &["a", "b"],
        &[&["x", "y"], &["red", "q"], &["x", "y"], &["red", "blue"]],
    );
    // Row 3 hits both pairs, row 1 hits only the first.
    let pairs = [(0, "red".to_string()), (1, "blue".to_string())];
    assert_eq!(
        select_rows_word_match(&table, &pairs),
        [3].into_iter().collect()
    );
}

#[test]
fn word_match_compares_whole_tokens() {
    let rows = select_rows_word_match(&presidents(), &[(0, "art".into())]);
    // No row contains the token "art", so every row ties at zero.
    assert_eq!(rows, (0..4).collect());
}

#[test]
fn embedding_verbatim_token_wins() {
    let table = t("e", &["k"], &[&["height"], &["born in"], &["spouse"]]);
    assert_eq!(
        select_rows_embedding(&table, &[(0, "born".into())], &toy_store()),
        [1].into_iter().collect()
    );
}

#[test]
fn embedding_oov_keyword_keeps_all_rows() {
    let table = t("e", &["k"], &[&["height"], &["born"]]);
    assert_eq!(
        select_rows_embedding(&table, &[(0, "zebra".into())], &toy_store()),
        (0..2).collect()
    );
    assert_eq!(
        select_rows_embedding(&table, &[], &toy_store()),
        (0..2).collect()
    );
}

#[test]
fn embedding_nearest_neighbour_row() {
    let table = t("e", &["k"], &[&["born"], &["spouse"], &["height"]]);
    assert_eq!(
        select_rows_embedding(&table, &[(0, "husband".into())], &toy_store()),
        [1].into_iter().collect()
    );
}

#[test]
fn embedding_oov_pair_adds_no_constraint() {
    let table = t("e", &["k", "v"], &[&["born", "zz"], &["spouse", "yy"]]);
    let pairs = [(1, "qqq".to_string()), (0, "husband".to_string())];
    assert_eq!(
        select_rows_embedding(&table, &pairs, &toy_store()),
        [1].into_iter().collect()
    );
}

#[test]
fn intersect_examples() {
    let table = t("x", &["a", "b", "c"], &[&["1", "2", "3"], &["4", "5", "6"]]);
    let set = |v: &[usize]| v.iter().copied().collect::<BTreeSet<usize>>();
    assert_eq!(
        intersect_cells(&table, &set(&[1]), &set(&[2])).unwrap(),
        [(1, 2)].into_iter().collect()
    );
    assert!(intersect_cells(&table, &set(&[]), &set(&[0]))
        .unwrap()
        .is_empty());
    assert_eq!(
        intersect_cells(&table, &set(&[0, 1]), &set(&[0, 2]))
            .unwrap()
            .len(),
        4
    );
    assert!(matches!(
        intersect_cells(&table, &set(&[2]), &set(&[0])),
        Err(QueryError::OutOfBounds { row: 2, .. })
    ));
    assert!(matches!(
        intersect_cells(&table, &set(&[0]), &set(&[3])),
        Err(QueryError::OutOfBounds { col: 3, .. })
    ));
}

#[test]
fn parse_numeric_handles_common_decorations() {
    assert_eq!(parse_numeric(" $1,234.5 "), Some(1234.5));
    assert_eq!(parse_numeric("45%"), Some(45.0));
    assert_eq!(parse_numeric("-3"), Some(-3.0));
    assert_eq!(parse_numeric("n/a"), None);
    assert_eq!(parse_numeric("inf"), None);
}

fn ident() -> impl Strategy<Value = String> {
    "[ -~]{1,12}"
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        Just(Op::SimMatch),
        Just(Op::Like),
        Just(Op::Equals),
        Just(Op::Greater),
        Just(Op::Less)
    ]
}

fn query() -> impl Strategy<Value = StructuredQuery> {
    (
        prop::collection::vec(ident(), 1..4),
        ident(),
        prop::collection::vec((ident(), op(), "[ -~]{0,10}"), 0..4),
        prop::option::of((ident(), any::<bool>())),
        prop::option::of(1usize..1000),
    )
        .prop_map(
            |(select, from_table, conds, order, limit)| StructuredQuery {
                select,
                from_table,
                conditions: conds
                    .into_iter()
                    .map(|(column, op, keyword)| Condition {
                        column,
                        op,
                        keyword,
                    })
                    .collect(),
                order_by: order.map(|(column, desc)| OrderBy {
                    column,
                    direction: if desc {
                        Direction::Desc
                    } else {
                        Direction::Asc
                    },
                }),
                limit,
            },
        )
}

fn grid() -> impl Strategy<Value = Table> {
    (1usize..5, 0usize..6).prop_flat_map(|(c, r)| {
        prop::collection::vec(prop::collection::vec("[a-c]{1,2}( [a-c]{1,2})?", c), r).prop_map(
            move |rows| {
                let headers = (0..c).map(|i| format!("h{i}")).collect();
                Table::new("g", headers, rows).unwrap()
            },
        )
    })
}

proptest! {
    #[test]
    fn parse_print_round_trip(q in query()) {
        let text = q.to_string();
        prop_assert_eq!(parse_query(&text).unwrap(), q);
    }

    #[test]
    fn parser_never_panics(s in "\\PC{0,60}") {
        let _ = parse_query(&s);
    }

    #[test]
    fn empty_where_yields_rows_times_select(table in grid(), pick in prop::collection::vec(0usize..4, 1..4)) {
        let select: Vec<String> = pick.iter().map(|i| format!("h{}", i % table.n_columns())).collect();
        let distinct: BTreeSet<&String> = select.iter().collect();
        let q = StructuredQuery::new(select.clone(), "g");
        let cells = execute(&q, &table, &toy_store(), &SimMatchConfig::default()).unwrap();
        prop_assert_eq!(cells.len(), table.n_rows() * distinct.len());
    }

    #[test]
    fn intersect_cardinality(table in grid(), rs in prop::collection::btree_set(0usize..6, 0..6), cs in prop::collection::btree_set(0usize..4, 0..4)) {
        let rows: BTreeSet<usize> = rs.into_iter().filter(|&r| r < table.n_rows()).collect();
        let cols: BTreeSet<usize> = cs.into_iter().filter(|&c| c < table.n_columns()).collect();
        let cells = intersect_cells(&table, &rows, &cols).unwrap();
        prop_assert_eq!(cells.len(), rows.len() * cols.len());
    }

    #[test]
    fn word_match_and_embedding_agree_on_exact_hits(table in grid(), col in 0usize..4, kw in "[a-c]{1,2}") {
        let col = col % table.n_columns();
        // Every token of the grid alphabet gets a distinct vector.
        let vocab = ["a", "b", "c", "aa", "ab", "ac", "ba", "bb", "bc", "ca", "cb", "cc"];
        let store = EmbeddingStore::from_entries(
            vocab.len(),
            vocab.iter().enumerate().map(|(i, w)| {
                let mut v = vec![0.0; vocab.len()];
                v[i] = 1.0;
                (w.to_string(), v)
            }),
        )
        .unwrap();
        let pairs = [(col, kw.clone())];
        let exact = table.column(col).any(|c| textproc::split_words(c).contains(&kw));
        prop_assume!(exact);
        prop_assert_eq!(
            select_rows_word_match(&table, &pairs),
            select_rows_embedding(&table, &pairs, &store)
        );
    }
}
