//! Known factors of the cyclotomic values Φ_d(2) for the indices d needed by
//! the bundled fixtures (every divisor of 2310 and of 60). Entries in the
//! second slice are composite cofactors that have resisted factoring.

pub(crate) static CYCLOTOMIC_FACTORS: &[(u64, &[&str], &[&str])] = &[
    (2, &["3"], &[]),
    (3, &["7"], &[]),
    (4, &["5"], &[]),
    (5, &["31"], &[]),
    (6, &["3"], &[]),
    (7, &["127"], &[]),
    (10, &["11"], &[]),
    (11, &["23", "89"], &[]),
    (12, &["13"], &[]),
    (14, &["43"], &[]),
    (15, &["151"], &[]),
    (20, &["5", "41"], &[]),
    (21, &["7", "337"], &[]),
    (22, &["683"], &[]),
    (30, &["331"], &[]),
    (33, &["599479"], &[]),
    (35, &["71", "122921"], &[]),
    (42, &["5419"], &[]),
    (55, &["881", "3191", "201961"], &[]),
    (60, &["61", "1321"], &[]),
    (66, &["67", "20857"], &[]),
    (70, &["281", "86171"], &[]),
    (77, &["581283643249112959"], &[]),
    (105, &["29191", "106681", "152041"], &[]),
    (110, &["11", "2971", "48912491"], &[]),
    (154, &["617", "78233", "35532364099"], &[]),
    (165, &["2048568835297380486760231"], &[]),
    (210, &["211", "664441", "1564921"], &[]),
    (231, &["463", "4982397651178256151338302204762057"], &[]),
    (330, &["415365721", "2252127523412251"], &[]),
    (385, &["55441", "1971764055031", "31055341681190444478126719755965134571151473925765532041"], &[]),
    (462, &["14323", "70180796165277040349245703851057"], &[]),
    (770, &["219980531"], &["5567742768990046314847022963097889957522681460274453710322897161"]),
    (1155, &["2311", "6250631311", "494224324441", "260078892331205274324088366772886790199621606534384599607578416912079166019131912393708208277038936454393545946152508951"], &[]),
    (2310, &["9241", "18481"], &["23439587812477739917700110745406058319591113804772201267526299045145381510019462730696740086653875229659606484537443635802294658423197171"]),
];
