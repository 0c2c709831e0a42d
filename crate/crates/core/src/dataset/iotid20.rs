//! Column names and label vocabulary of the IoTID20 flow dataset.

pub const LABEL_COLUMN: &str = "Label";
pub const CATEGORY_COLUMN: &str = "Cat";
pub const SUBCATEGORY_COLUMN: &str = "Sub_Cat";

/// Flow identifiers, dropped before training.
pub const IDENTIFIER_COLUMNS: [&str; 5] = ["Flow_ID", "Src_IP", "Dst_IP", "Dst_Port", "Protocol"];

/// Features known to hold a single value across the whole dataset.
pub const CONSTANT_COLUMNS: [&str; 10] = [
    "Fwd_PSH_Flags",
    "Fwd_URG_Flags",
    "Fwd_Byts/b_Avg",
    "Fwd_Pkts/b_Avg",
    "Fwd_Blk_Rate_Avg",
    "Bwd_Byts/b_Avg",
    "Bwd_Pkts/b_Avg",
    "Bwd_Blk_Rate_Avg",
    "Init_Fwd_Win_Byts",
    "Fwd_Seg_Size_Min",
];

/// Header of the published CSV, in file order.
pub const COLUMNS: [&str; 86] = [
    "Flow_ID",
    "Src_IP",
    "Src_Port",
    "Dst_IP",
    "Dst_Port",
    "Protocol",
    "Timestamp",
    "Flow_Duration",
    "Tot_Fwd_Pkts",
    "Tot_Bwd_Pkts",
    "TotLen_Fwd_Pkts",
    "TotLen_Bwd_Pkts",
    "Fwd_Pkt_Len_Max",
    "Fwd_Pkt_Len_Min",
    "Fwd_Pkt_Len_Mean",
    "Fwd_Pkt_Len_Std",
    "Bwd_Pkt_Len_Max",
    "Bwd_Pkt_Len_Min",
    "Bwd_Pkt_Len_Mean",
    "Bwd_Pkt_Len_Std",
    "Flow_Byts/s",
    "Flow_Pkts/s",
    "Flow_IAT_Mean",
    "Flow_IAT_Std",
    "Flow_IAT_Max",
    "Flow_IAT_Min",
    "Fwd_IAT_Tot",
    "Fwd_IAT_Mean",
    "Fwd_IAT_Std",
    "Fwd_IAT_Max",
    "Fwd_IAT_Min",
    "Bwd_IAT_Tot",
    "Bwd_IAT_Mean",
    "Bwd_IAT_Std",
    "Bwd_IAT_Max",
    "Bwd_IAT_Min",
    "Fwd_PSH_Flags",
    "Bwd_PSH_Flags",
    "Fwd_URG_Flags",
    "Bwd_URG_Flags",
    "Fwd_Header_Len",
    "Bwd_Header_Len",
    "Fwd_Pkts/s",
    "Bwd_Pkts/s",
    "Pkt_Len_Min",
    "Pkt_Len_Max",
    "Pkt_Len_Mean",
    "Pkt_Len_Std",
    "Pkt_Len_Var",
    "FIN_Flag_Cnt",
    "SYN_Flag_Cnt",
    "RST_Flag_Cnt",
    "PSH_Flag_Cnt",
    "ACK_Flag_Cnt",
    "URG_Flag_Cnt",
    "CWE_Flag_Count",
    "ECE_Flag_Cnt",
    "Down/Up_Ratio",
    "Pkt_Size_Avg",
    "Fwd_Seg_Size_Avg",
    "Bwd_Seg_Size_Avg",
    "Fwd_Byts/b_Avg",
    "Fwd_Pkts/b_Avg",
    "Fwd_Blk_Rate_Avg",
    "Bwd_Byts/b_Avg",
    "Bwd_Pkts/b_Avg",
    "Bwd_Blk_Rate_Avg",
    "Subflow_Fwd_Pkts",
    "Subflow_Fwd_Byts",
    "Subflow_Bwd_Pkts",
    "Subflow_Bwd_Byts",
    "Init_Fwd_Win_Byts",
    "Init_Bwd_Win_Byts",
    "Fwd_Act_Data_Pkts",
    "Fwd_Seg_Size_Min",
    "Active_Mean",
    "Active_Std",
    "Active_Max",
    "Active_Min",
    "Idle_Mean",
    "Idle_Std",
    "Idle_Max",
    "Idle_Min",
    "Label",
    "Cat",
    "Sub_Cat",
];

/// `(binary, category, subcategory, records in the full dataset)`.
pub const CLASSES: [(&str, &str, &str, usize); 9] = [
    ("Anomaly", "DoS", "DoS-Synflooding", 59_391),
    ("Anomaly", "MITM ARP Spoofing", "MITM ARP Spoofing", 35_377),
    ("Anomaly", "Mirai", "Mirai-Ackflooding", 55_124),
    ("Anomaly", "Mirai", "Mirai-HTTP Flooding", 55_818),
    ("Anomaly", "Mirai", "Mirai-Hostbruteforceg", 121_181),
    ("Anomaly", "Mirai", "Mirai-UDP Flooding", 183_554),
    ("Normal", "Normal", "Normal", 40_073),
    ("Anomaly", "Scan", "Scan Hostport", 22_192),
    ("Anomaly", "Scan", "Scan Port OS", 53_073),
];

pub const TOTAL_RECORDS: usize = 625_783;
